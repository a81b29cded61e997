#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "arena/core/time.hpp"

namespace arena::market {

enum class Frequency { hourly, daily };

std::string_view to_string(Frequency f) noexcept;
Frequency parse_frequency(std::string_view text);

/// One trading session on a set of weekdays, in exchange-local minutes since
/// midnight. `close` may be 24:00 (1440).
struct SessionWindow {
    std::array<bool, 7> weekdays{};  // indexed by weekday::c_encoding(), Sunday = 0
    std::chrono::minutes open{0};
    std::chrono::minutes close{0};
};

/// Exchange calendar with a fixed UTC offset (no DST).
///
/// Calendar file grammar, one `key = value` per line, `#` starts a comment:
///
///     continuous = false
///     session    = MON-FRI 09:30-16:00 UTC-5
///     session    = MON-FRI 13:00-15:00 UTC+8
///     holiday    = 2025-11-27
///
/// Weekday sets are comma-separated days or ranges (`MON,WED-FRI`, `MON-SUN`).
/// Offsets are `UTC`, `UTC+8`, `UTC-5` or `UTC+05:30`; all sessions in one
/// file must share the same offset. Holidays are exchange-local dates.
/// `continuous = true` forbids `session` and `holiday` lines.
class TradingCalendar {
public:
    /// 24/7 calendar in UTC.
    static TradingCalendar continuous_utc();

    TradingCalendar(std::vector<SessionWindow> windows, std::set<std::chrono::sys_days> holidays,
                    std::chrono::minutes utc_offset);

    static TradingCalendar parse(std::istream& in);
    static TradingCalendar load(const std::filesystem::path& path);

    bool continuous() const noexcept { return continuous_; }
    std::chrono::minutes utc_offset() const noexcept { return offset_; }
    const std::vector<SessionWindow>& windows() const noexcept { return windows_; }
    const std::set<std::chrono::sys_days>& holidays() const noexcept { return holidays_; }

    bool is_trading_time(Timestamp t) const;

    /// Decision instants in [from, to]: each session open for daily runs, each
    /// hour boundary from a session open (while inside the session) for hourly.
    std::vector<Timestamp> decision_times(Frequency freq, Timestamp from, Timestamp to) const;
    bool is_decision_time(Frequency freq, Timestamp t) const;

    /// Close of the period that starts at decision instant `t`.
    Timestamp period_end(Frequency freq, Timestamp t) const;

    /// Longest total session length of any weekday, in hours.
    double session_hours_per_day() const;

private:
    TradingCalendar() = default;

    std::chrono::sys_days local_day(Timestamp t) const;
    bool is_trading_day(std::chrono::sys_days local) const;
    std::vector<Timestamp> decisions_on(Frequency freq, std::chrono::sys_days local) const;

    std::vector<SessionWindow> windows_;
    std::set<std::chrono::sys_days> holidays_;
    std::chrono::minutes offset_{0};
    bool continuous_ = false;
};

}  // namespace arena::market
