#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arena {

// Every failure the harness can raise. The snake_case spelling of each
// enumerator is the wire-level error code (see to_string).
enum class Errc {
    unknown_market,
    malformed_universe_file,
    malformed_calendar_file,
    non_positive_quantity,
    malformed_row,
    duplicate_bar,
    ohlc_violation,
    no_data,
    unknown_symbol,
    temporal_violation,
    store_frozen,
    store_not_frozen,
    missing_price,
    parse_error,
    division_by_zero,
    non_finite_result,
    clock_regression,
    not_a_decision_time,
    config_error,
    data_gap,
    invalid_params,
    non_positive_valuation,
    too_short,
    empty_log,
    window_mismatch,
    io_error,
    corrupt_log,
    port_in_use,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace arena
