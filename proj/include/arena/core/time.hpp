#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace arena {

/// UTC instant at one-second resolution. All harness clocks and record
/// timestamps use this type.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Parses RFC 3339 (`2025-10-01T13:30:00Z`, `...+08:00`, optional fractional
/// seconds are truncated). A bare `YYYY-MM-DD` is accepted as midnight UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Like parse_timestamp but throws Error(parse_error).
Timestamp parse_timestamp_or_throw(std::string_view text);

/// Canonical rendering: `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp ts);

/// `YYYY-MM-DD` for a calendar day.
std::string format_date(std::chrono::sys_days day);
std::optional<std::chrono::sys_days> parse_date(std::string_view text);

}  // namespace arena
