#pragma once

// Exact rational scalars. Thin helpers around GMP's mpq_class: canonical
// parsing/printing ("p/q" or "p"), and a few conveniences used across the
// library. All arithmetic in the library is exact; there is no floating point.

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace ainfty {

using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Parses "p", "-p", "p/q". Returns std::nullopt on malformed input.
inline std::optional<Rat> parse_rational(const std::string& s) {
  if (s.empty()) return std::nullopt;
  // mpq_class(string) accepts whitespace and other bases; be strict instead.
  std::size_t i = 0;
  auto digits = [&](std::size_t& j) {
    std::size_t start = j;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    return j > start;
  };
  if (s[i] == '+' || s[i] == '-') ++i;
  if (!digits(i)) return std::nullopt;
  if (i < s.size()) {
    if (s[i] != '/') return std::nullopt;
    ++i;
    std::size_t denStart = i;
    if (!digits(i) || i != s.size()) return std::nullopt;
    if (s.substr(denStart) == "0") return std::nullopt;
  }
  Rat r;
  if (r.set_str(s, 10) != 0) return std::nullopt;
  r.canonicalize();
  return r;
}

inline std::string format_rational(const Rat& r) {
  return r.get_str();  // canonical "p" or "p/q", denominator positive
}

inline Rat parse_rational_or_throw(const std::string& s) {
  auto r = parse_rational(s);
  if (!r) throw std::runtime_error("malformed rational: '" + s + "'");
  return *r;
}

}  // namespace ainfty
