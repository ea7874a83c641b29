#include "coi/cve.hpp"

#include <charconv>
#include <regex>

#include <fmt/format.h>

namespace coi {
namespace {

std::optional<CveId> from_parts(std::string_view year, std::string_view sequence) {
  CveId id;
  auto [yp, yec] = std::from_chars(year.data(), year.data() + year.size(), id.year);
  auto [sp, sec] = std::from_chars(sequence.data(), sequence.data() + sequence.size(), id.sequence);
  if (yec != std::errc{} || sec != std::errc{} || yp != year.data() + year.size() ||
      sp != sequence.data() + sequence.size() || id.sequence == 0) {
    return std::nullopt;
  }
  return id;
}

const std::regex& mention_pattern() {
  static const std::regex pattern(R"((?:^|[^A-Za-z0-9])CVE-(\d{4})-(\d{4,})(?![A-Za-z0-9]))",
                                  std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
  return pattern;
}

}  // namespace

std::optional<CveId> CveId::parse(std::string_view text) {
  static const std::regex exact(R"(CVE-(\d{4})-(\d{4,}))", std::regex::ECMAScript | std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, exact)) return std::nullopt;
  return from_parts(std::string_view(&*m[1].first, static_cast<std::size_t>(m[1].length())),
                    std::string_view(&*m[2].first, static_cast<std::size_t>(m[2].length())));
}

std::string CveId::str() const { return fmt::format("CVE-{:04d}-{:04d}", year, sequence); }

CveSet extract_cve_ids(std::string_view text) {
  CveSet out;
  using It = std::string_view::const_iterator;
  for (std::regex_iterator<It> it(text.begin(), text.end(), mention_pattern()), end; it != end; ++it) {
    const auto& m = *it;
    auto id = from_parts(std::string_view(&*m[1].first, static_cast<std::size_t>(m[1].length())),
                         std::string_view(&*m[2].first, static_cast<std::size_t>(m[2].length())));
    if (id) out.insert(*id);
  }
  return out;
}

}  // namespace coi
