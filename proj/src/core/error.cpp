#include "arena/core/error.hpp"

namespace arena {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::unknown_market: return "unknown_market";
        case Errc::malformed_universe_file: return "malformed_universe_file";
        case Errc::malformed_calendar_file: return "malformed_calendar_file";
        case Errc::non_positive_quantity: return "non_positive_quantity";
        case Errc::malformed_row: return "malformed_row";
        case Errc::duplicate_bar: return "duplicate_bar";
        case Errc::ohlc_violation: return "ohlc_violation";
        case Errc::no_data: return "no_data";
        case Errc::unknown_symbol: return "unknown_symbol";
        case Errc::temporal_violation: return "temporal_violation";
        case Errc::store_frozen: return "store_frozen";
        case Errc::store_not_frozen: return "store_not_frozen";
        case Errc::missing_price: return "missing_price";
        case Errc::parse_error: return "parse_error";
        case Errc::division_by_zero: return "division_by_zero";
        case Errc::non_finite_result: return "non_finite_result";
        case Errc::clock_regression: return "clock_regression";
        case Errc::not_a_decision_time: return "not_a_decision_time";
        case Errc::config_error: return "config_error";
        case Errc::data_gap: return "data_gap";
        case Errc::invalid_params: return "invalid_params";
        case Errc::non_positive_valuation: return "non_positive_valuation";
        case Errc::too_short: return "too_short";
        case Errc::empty_log: return "empty_log";
        case Errc::window_mismatch: return "window_mismatch";
        case Errc::io_error: return "io_error";
        case Errc::corrupt_log: return "corrupt_log";
        case Errc::port_in_use: return "port_in_use";
    }
    return "unknown_error";
}

}  // namespace arena
