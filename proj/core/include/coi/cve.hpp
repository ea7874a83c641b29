#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace coi {

/// CVE identifier. Canonical text form is `CVE-<year>-<sequence>` with the
/// sequence zero-padded to the official four-digit minimum.
struct CveId {
  int year = 0;
  std::uint64_t sequence = 0;

  /// Accepts exactly one identifier (case-insensitive prefix); nullopt otherwise.
  static std::optional<CveId> parse(std::string_view text);

  std::string str() const;

  auto operator<=>(const CveId&) const = default;
};

using CveSet = std::set<CveId>;

/// All CVE identifiers mentioned in free text. Matching is case-insensitive
/// and bounded: an identifier glued to surrounding letters or digits is not a
/// mention. Repeated mentions collapse.
CveSet extract_cve_ids(std::string_view text);

}  // namespace coi
