#include "arena/market/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "arena/core/error.hpp"

namespace arena::market {

namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 7> kDayNames = {"SUN", "MON", "TUE", "WED", "THU", "FRI", "SAT"};

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(int line, const std::string& why) {
    throw Error(Errc::malformed_calendar_file, "calendar line " + std::to_string(line) + ": " + why);
}

int day_index(std::string_view name, int line) {
    for (std::size_t i = 0; i < kDayNames.size(); ++i) {
        if (kDayNames[i] == name) {
            return static_cast<int>(i);
        }
    }
    fail(line, "unknown weekday '" + std::string(name) + "'");
}

std::array<bool, 7> parse_weekdays(std::string_view spec, int line) {
    std::array<bool, 7> days{};
    std::stringstream ss{std::string(spec)};
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto dash = part.find('-');
        if (dash == std::string::npos) {
            days[day_index(part, line)] = true;
            continue;
        }
        // Ranges walk Monday-first so MON-SUN covers the whole week.
        auto to_monday_first = [](int idx) { return (idx + 6) % 7; };
        int a = to_monday_first(day_index(std::string_view(part).substr(0, dash), line));
        int b = to_monday_first(day_index(std::string_view(part).substr(dash + 1), line));
        if (a > b) {
            fail(line, "descending weekday range '" + part + "'");
        }
        for (int i = a; i <= b; ++i) {
            days[(i + 1) % 7] = true;
        }
    }
    return days;
}

minutes parse_hhmm(std::string_view text, int line) {
    int h = 0;
    int m = 0;
    if (text.size() != 5 || text[2] != ':' ||
        std::from_chars(text.data(), text.data() + 2, h).ec != std::errc{} ||
        std::from_chars(text.data() + 3, text.data() + 5, m).ec != std::errc{} || m > 59 ||
        h > 24 || (h == 24 && m != 0)) {
        fail(line, "bad time '" + std::string(text) + "'");
    }
    return hours{h} + minutes{m};
}

minutes parse_offset(std::string_view text, int line) {
    if (text.substr(0, 3) != "UTC") {
        fail(line, "offset must start with UTC: '" + std::string(text) + "'");
    }
    text.remove_prefix(3);
    if (text.empty()) {
        return minutes{0};
    }
    int sign = 1;
    if (text[0] == '-') {
        sign = -1;
    } else if (text[0] != '+') {
        fail(line, "bad offset sign");
    }
    text.remove_prefix(1);
    int h = 0;
    int m = 0;
    auto colon = text.find(':');
    auto hpart = text.substr(0, colon);
    if (hpart.empty() || std::from_chars(hpart.data(), hpart.data() + hpart.size(), h).ec != std::errc{}) {
        fail(line, "bad offset hours");
    }
    if (colon != std::string_view::npos) {
        auto mpart = text.substr(colon + 1);
        if (mpart.size() != 2 || std::from_chars(mpart.data(), mpart.data() + 2, m).ec != std::errc{}) {
            fail(line, "bad offset minutes");
        }
    }
    if (h > 14 || m > 59) {
        fail(line, "offset out of range");
    }
    return minutes{sign * (h * 60 + m)};
}

void check_windows(const std::vector<SessionWindow>& windows, int line) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].open >= windows[i].close) {
            fail(line, "session opens at or after it closes");
        }
        for (std::size_t j = i + 1; j < windows.size(); ++j) {
            for (int d = 0; d < 7; ++d) {
                if (windows[i].weekdays[d] && windows[j].weekdays[d] &&
                    windows[i].open < windows[j].close && windows[j].open < windows[i].close) {
                    fail(line, "overlapping sessions on " + std::string(kDayNames[d]));
                }
            }
        }
    }
}

}  // namespace

std::string_view to_string(Frequency f) noexcept {
    return f == Frequency::hourly ? "hourly" : "daily";
}

Frequency parse_frequency(std::string_view text) {
    if (text == "hourly") {
        return Frequency::hourly;
    }
    if (text == "daily") {
        return Frequency::daily;
    }
    throw Error(Errc::config_error, "unknown frequency '" + std::string(text) + "'");
}

TradingCalendar TradingCalendar::continuous_utc() {
    TradingCalendar cal;
    SessionWindow all;
    all.weekdays.fill(true);
    all.open = minutes{0};
    all.close = hours{24};
    cal.windows_.push_back(all);
    cal.continuous_ = true;
    return cal;
}

TradingCalendar::TradingCalendar(std::vector<SessionWindow> windows, std::set<sys_days> holidays,
                                 minutes utc_offset)
    : windows_(std::move(windows)), holidays_(std::move(holidays)), offset_(utc_offset) {
    if (windows_.empty()) {
        throw Error(Errc::malformed_calendar_file, "calendar has no sessions");
    }
    check_windows(windows_, 0);
    std::sort(windows_.begin(), windows_.end(),
              [](const SessionWindow& a, const SessionWindow& b) { return a.open < b.open; });
}

TradingCalendar TradingCalendar::parse(std::istream& in) {
    std::vector<SessionWindow> windows;
    std::set<sys_days> holidays;
    std::optional<minutes> offset;
    bool continuous = false;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string text = trim(std::string_view(raw).substr(0, hash));
        if (text.empty()) {
            continue;
        }
        auto eq = text.find('=');
        if (eq == std::string::npos) {
            fail(line, "expected key = value");
        }
        std::string key = trim(std::string_view(text).substr(0, eq));
        std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key == "continuous") {
            if (value != "true" && value != "false") {
                fail(line, "continuous must be true or false");
            }
            continuous = value == "true";
        } else if (key == "session") {
            std::istringstream parts(value);
            std::string days;
            std::string span;
            std::string tz;
            std::string extra;
            if (!(parts >> days >> span >> tz) || (parts >> extra)) {
                fail(line, "session must be '<DAYS> HH:MM-HH:MM UTC<offset>'");
            }
            auto dash = span.find('-');
            if (dash == std::string::npos) {
                fail(line, "session span must be HH:MM-HH:MM");
            }
            SessionWindow w;
            w.weekdays = parse_weekdays(days, line);
            w.open = parse_hhmm(std::string_view(span).substr(0, dash), line);
            w.close = parse_hhmm(std::string_view(span).substr(dash + 1), line);
            minutes off = parse_offset(tz, line);
            if (offset && *offset != off) {
                fail(line, "all sessions must share one UTC offset");
            }
            offset = off;
            windows.push_back(w);
            check_windows(windows, line);
        } else if (key == "holiday") {
            auto day = parse_date(value);
            if (!day) {
                fail(line, "holiday must be YYYY-MM-DD");
            }
            holidays.insert(*day);
        } else {
            fail(line, "unknown key '" + key + "'");
        }
    }
    if (continuous) {
        if (!windows.empty() || !holidays.empty()) {
            fail(line, "continuous calendars take no sessions or holidays");
        }
        return continuous_utc();
    }
    if (windows.empty()) {
        fail(line, "no session lines");
    }
    return TradingCalendar(std::move(windows), std::move(holidays), offset.value_or(minutes{0}));
}

TradingCalendar TradingCalendar::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io_error, "no such file: " + path.string());
    }
    return parse(in);
}

sys_days TradingCalendar::local_day(Timestamp t) const {
    return floor<days>(t + offset_);
}

bool TradingCalendar::is_trading_day(sys_days local) const {
    if (holidays_.count(local) != 0) {
        return false;
    }
    unsigned wd = weekday{local}.c_encoding();
    return std::any_of(windows_.begin(), windows_.end(),
                       [wd](const SessionWindow& w) { return w.weekdays[wd]; });
}

bool TradingCalendar::is_trading_time(Timestamp t) const {
    if (continuous_) {
        return true;
    }
    sys_days day = local_day(t);
    if (holidays_.count(day) != 0) {
        return false;
    }
    auto tod = duration_cast<minutes>((t + offset_) - day);
    unsigned wd = weekday{day}.c_encoding();
    return std::any_of(windows_.begin(), windows_.end(), [&](const SessionWindow& w) {
        return w.weekdays[wd] && tod >= w.open && tod < w.close;
    });
}

std::vector<Timestamp> TradingCalendar::decisions_on(Frequency freq, sys_days local) const {
    std::vector<Timestamp> out;
    if (!is_trading_day(local)) {
        return out;
    }
    unsigned wd = weekday{local}.c_encoding();
    for (const auto& w : windows_) {
        if (!w.weekdays[wd]) {
            continue;
        }
        Timestamp open = Timestamp{local} + w.open - offset_;
        if (freq == Frequency::daily) {
            out.push_back(open);
            break;  // windows_ is sorted by open time
        }
        for (auto m = w.open; m < w.close; m += hours{1}) {
            out.push_back(Timestamp{local} + m - offset_);
        }
    }
    return out;
}

std::vector<Timestamp> TradingCalendar::decision_times(Frequency freq, Timestamp from, Timestamp to) const {
    std::vector<Timestamp> out;
    if (from > to) {
        return out;
    }
    for (sys_days d = local_day(from); d <= local_day(to); d += days{1}) {
        for (Timestamp t : decisions_on(freq, d)) {
            if (t >= from && t <= to) {
                out.push_back(t);
            }
        }
    }
    return out;
}

bool TradingCalendar::is_decision_time(Frequency freq, Timestamp t) const {
    auto day = decisions_on(freq, local_day(t));
    return std::find(day.begin(), day.end(), t) != day.end();
}

Timestamp TradingCalendar::period_end(Frequency freq, Timestamp t) const {
    sys_days day = local_day(t);
    unsigned wd = weekday{day}.c_encoding();
    auto tod = duration_cast<minutes>((t + offset_) - day);
    if (freq == Frequency::hourly) {
        for (const auto& w : windows_) {
            if (w.weekdays[wd] && tod >= w.open && tod < w.close) {
                return std::min(t + hours{1}, Timestamp{day} + w.close - offset_);
            }
        }
        return t + hours{1};
    }
    minutes last_close{0};
    for (const auto& w : windows_) {
        if (w.weekdays[wd]) {
            last_close = std::max(last_close, w.close);
        }
    }
    Timestamp end = Timestamp{day} + last_close - offset_;
    return end > t ? end : t + hours{24};
}

double TradingCalendar::session_hours_per_day() const {
    double best = 0.0;
    for (int d = 0; d < 7; ++d) {
        double total = 0.0;
        for (const auto& w : windows_) {
            if (w.weekdays[d]) {
                total += static_cast<double>((w.close - w.open).count()) / 60.0;
            }
        }
        best = std::max(best, total);
    }
    return best;
}

}  // namespace arena::market
