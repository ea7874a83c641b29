#pragma once

// Character-level CVE scanner, no regex involved.

#include <cstdint>
#include <set>
#include <string_view>
#include <utility>

namespace oracle {

inline bool alnum_ascii(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool digit(char c) { return c >= '0' && c <= '9'; }

/// (year, sequence) pairs for every bounded, case-insensitive mention.
inline std::set<std::pair<int, std::uint64_t>> scan_cves(std::string_view t) {
  std::set<std::pair<int, std::uint64_t>> out;
  auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
  for (std::size_t i = 0; i + 13 <= t.size(); ++i) {
    if (i > 0 && alnum_ascii(t[i - 1])) continue;
    if (lower(t[i]) != 'c' || lower(t[i + 1]) != 'v' || lower(t[i + 2]) != 'e' || t[i + 3] != '-') continue;
    std::size_t p = i + 4;
    int year = 0;
    bool ok = true;
    for (int k = 0; k < 4; ++k, ++p) {
      if (!digit(t[p])) {
        ok = false;
        break;
      }
      year = year * 10 + (t[p] - '0');
    }
    if (!ok || p >= t.size() || t[p] != '-') continue;
    ++p;
    const std::size_t start = p;
    std::uint64_t seq = 0;
    while (p < t.size() && digit(t[p])) seq = seq * 10 + static_cast<std::uint64_t>(t[p++] - '0');
    if (p - start < 4) continue;
    if (p < t.size() && alnum_ascii(t[p])) continue;
    if (seq == 0) continue;
    out.emplace(year, seq);
    i = p - 1;
  }
  return out;
}

}  // namespace oracle
