#pragma once
// Small dense exact linear algebra over the rationals: rank, solving,
// nullspaces, inverses.  Everything is Gaussian elimination with exact
// arithmetic; matrices here are tiny (model dimensions), so no pivoting
// strategy beyond "first nonzero" is needed.

#include <optional>
#include <vector>

#include "ainfty/rational.hpp"

namespace ainfty {

using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;  // row-major

// Reduced row echelon form in place; returns the pivot column of each pivot row.
inline std::vector<int> rref(RatMat& m) {
  std::vector<int> pivots;
  if (m.empty()) return pivots;
  size_t rows = m.size(), cols = m[0].size();
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    Rat inv = 1 / m[r][c];
    for (size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Rat f = m[i][c];
      for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(static_cast<int>(c));
    ++r;
  }
  return pivots;
}

inline int rank(RatMat m) { return static_cast<int>(rref(m).size()); }

// Basis of { x : A x = 0 }.
inline std::vector<RatVec> nullspace(RatMat a) {
  if (a.empty()) return {};
  size_t cols = a[0].size();
  std::vector<int> pivots = rref(a);
  std::vector<char> is_pivot(cols, 0);
  for (int c : pivots) is_pivot[static_cast<size_t>(c)] = 1;
  std::vector<RatVec> basis;
  for (size_t freec = 0; freec < cols; ++freec) {
    if (is_pivot[freec]) continue;
    RatVec x(cols, Rat(0));
    x[freec] = 1;
    for (size_t pr = 0; pr < pivots.size(); ++pr)
      x[static_cast<size_t>(pivots[pr])] = -a[pr][freec];
    basis.push_back(std::move(x));
  }
  return basis;
}

// One solution of A x = b, if any.
inline std::optional<RatVec> solve(RatMat a, RatVec b) {
  size_t rows = a.size();
  if (rows == 0) {
    for (const Rat& v : b)
      if (v != 0) return std::nullopt;
    return RatVec{};
  }
  size_t cols = a[0].size();
  for (size_t i = 0; i < rows; ++i) a[i].push_back(b[i]);
  std::vector<int> pivots = rref(a);
  // Inconsistent iff a pivot lands in the appended column.
  if (!pivots.empty() && pivots.back() == static_cast<int>(cols)) return std::nullopt;
  RatVec x(cols, Rat(0));
  for (size_t pr = 0; pr < pivots.size(); ++pr)
    x[static_cast<size_t>(pivots[pr])] = a[pr][cols];
  return x;
}

inline std::optional<RatMat> inverse(const RatMat& a) {
  size_t nn = a.size();
  RatMat aug(nn);
  for (size_t i = 0; i < nn; ++i) {
    if (a[i].size() != nn) return std::nullopt;
    aug[i] = a[i];
    for (size_t j = 0; j < nn; ++j) aug[i].push_back(i == j ? Rat(1) : Rat(0));
  }
  std::vector<int> pivots = rref(aug);
  if (pivots.size() != nn) return std::nullopt;
  RatMat inv(nn, RatVec(nn));
  for (size_t i = 0; i < nn; ++i)
    for (size_t j = 0; j < nn; ++j) inv[i][j] = aug[i][nn + j];
  return inv;
}

inline RatVec mat_vec(const RatMat& a, const RatVec& x) {
  RatVec y(a.size(), Rat(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

}  // namespace ainfty
