#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace coi {

using Timestamp = std::chrono::sys_seconds;

/// Parses an ISO-8601 instant: `YYYY-MM-DDTHH:MM:SS` followed by `Z` or a
/// `+HH:MM` / `-HH:MM` offset. Fractional seconds are truncated. A space is
/// accepted in place of `T`.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_timestamp(Timestamp t);

/// Whole days elapsed from `from` to `to` (floor); negative if `to < from`.
long whole_days_between(Timestamp from, Timestamp to);

}  // namespace coi
