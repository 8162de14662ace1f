#pragma once

// Finitely generated convex sets of sub-distributions and the exact rational
// feasibility routine used to decide hull membership.

#include <algorithm>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "timedeq/errors.hpp"
#include "timedeq/rational.hpp"

namespace timedeq {

// One generator: a finitely supported sub-distribution over
// (label, state) pairs plus optional mass on the accepting symbol.
struct DistGenerator {
  std::vector<std::tuple<int, int, Rat>> mass;  // (label, state, weight > 0), sorted
  Rat accept = 0;

  Rat total() const {
    Rat t = accept;
    for (const auto& [l, s, w] : mass) t += w;
    return t;
  }

  void add(int label, int state, const Rat& w) {
    if (w != 0) mass.emplace_back(label, state, w);
  }

  // Sorts support points, merges duplicates, drops zero weights.
  void normalize() {
    std::sort(mass.begin(), mass.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) <
             std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<std::tuple<int, int, Rat>> merged;
    for (auto& [l, s, w] : mass) {
      if (!merged.empty() && std::get<0>(merged.back()) == l &&
          std::get<1>(merged.back()) == s) {
        std::get<2>(merged.back()) += w;
      } else {
        merged.emplace_back(l, s, w);
      }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const auto& t) { return std::get<2>(t) == 0; }),
                 merged.end());
    mass = std::move(merged);
  }

  friend bool operator==(const DistGenerator& a, const DistGenerator& b) {
    return a.accept == b.accept && a.mass == b.mass;
  }
  friend bool operator<(const DistGenerator& a, const DistGenerator& b) {
    if (a.mass != b.mass) return a.mass < b.mass;
    return a.accept < b.accept;
  }
};

inline DistGenerator gen_scaled(const DistGenerator& g, const Rat& r) {
  DistGenerator out;
  out.accept = g.accept * r;
  for (const auto& [l, s, w] : g.mass) out.add(l, s, w * r);
  return out;
}

inline DistGenerator gen_sum(const DistGenerator& a, const DistGenerator& b) {
  DistGenerator out = a;
  out.accept += b.accept;
  out.mass.insert(out.mass.end(), b.mass.begin(), b.mass.end());
  out.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Exact phase-1 simplex: does { x >= 0 : Ax = b } have a solution?
// Bland's rule; all arithmetic in exact rationals.
// ---------------------------------------------------------------------------

inline bool rational_feasible(std::vector<std::vector<Rat>> A, std::vector<Rat> b) {
  const size_t m = A.size();
  if (m == 0) return true;
  const size_t n = A[0].size();
  for (size_t i = 0; i < m; ++i) {
    if (b[i] < 0) {
      for (auto& v : A[i]) v = -v;
      b[i] = -b[i];
    }
  }
  const size_t cols = n + m;  // n structural + m artificial
  std::vector<std::vector<Rat>> T(m + 1, std::vector<Rat>(cols + 1, Rat(0)));
  std::vector<size_t> basis(m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1;
    T[i][cols] = b[i];
    basis[i] = n + i;
  }
  // objective: minimize sum of artificials, reduced costs with artificials basic
  for (size_t j = 0; j <= cols; ++j) {
    Rat s = 0;
    for (size_t i = 0; i < m; ++i) s += T[i][j];
    T[m][j] = (j >= n && j < cols) ? Rat(1) - s : -s;
  }

  while (true) {
    size_t enter = cols;
    for (size_t j = 0; j < cols; ++j) {
      if (T[m][j] < 0) {
        enter = j;
        break;  // Bland: smallest index
      }
    }
    if (enter == cols) break;
    size_t leave = m;
    for (size_t i = 0; i < m; ++i) {
      if (T[i][enter] <= 0) continue;
      if (leave == m) {
        leave = i;
        continue;
      }
      Rat cur = T[i][cols] / T[i][enter];
      Rat best = T[leave][cols] / T[leave][enter];
      if (cur < best || (cur == best && basis[i] < basis[leave])) leave = i;
    }
    if (leave == m) return false;  // cannot happen for a bounded phase-1
    Rat piv = T[leave][enter];
    for (auto& v : T[leave]) v /= piv;
    for (size_t i = 0; i <= m; ++i) {
      if (i == leave || T[i][enter] == 0) continue;
      Rat f = T[i][enter];
      for (size_t j = 0; j <= cols; ++j) T[i][j] -= f * T[leave][j];
    }
    basis[leave] = enter;
  }

  Rat residue = 0;
  for (size_t i = 0; i < m; ++i)
    if (basis[i] >= n) residue += T[i][cols];
  return residue == 0;
}

namespace detail {

// Shared coordinate space for a family of generators: (label,state) support
// points then the accept axis.
inline std::vector<std::pair<int, int>> coordinate_space(
    const DistGenerator& target, const std::vector<DistGenerator>& gens) {
  std::vector<std::pair<int, int>> coords;
  auto collect = [&](const DistGenerator& g) {
    for (const auto& [l, s, w] : g.mass) coords.emplace_back(l, s);
  };
  collect(target);
  for (const auto& g : gens) collect(g);
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return coords;
}

inline std::vector<Rat> vectorize(const DistGenerator& g,
                                  const std::vector<std::pair<int, int>>& coords) {
  std::vector<Rat> v(coords.size() + 1, Rat(0));
  for (const auto& [l, s, w] : g.mass) {
    auto it = std::lower_bound(coords.begin(), coords.end(), std::make_pair(l, s));
    v[static_cast<size_t>(it - coords.begin())] = w;
  }
  v.back() = g.accept;
  return v;
}

}  // namespace detail

// Membership of `target` in the convex hull of `gens`, allowing an L-infinity
// slack of `tol` per coordinate (tol = 0 gives the exact test).
inline bool in_hull(const DistGenerator& target, const std::vector<DistGenerator>& gens,
                    const Rat& tol = Rat(0)) {
  if (gens.empty()) return false;
  auto coords = detail::coordinate_space(target, gens);
  const size_t d = coords.size() + 1;
  const size_t k = gens.size();
  std::vector<Rat> t = detail::vectorize(target, coords);
  std::vector<std::vector<Rat>> G(k);
  for (size_t i = 0; i < k; ++i) G[i] = detail::vectorize(gens[i], coords);

  std::vector<std::vector<Rat>> A;
  std::vector<Rat> b;
  if (tol == 0) {
    // sum lambda_i G_i = t ; sum lambda = 1
    for (size_t r = 0; r < d; ++r) {
      std::vector<Rat> row(k);
      for (size_t i = 0; i < k; ++i) row[i] = G[i][r];
      A.push_back(std::move(row));
      b.push_back(t[r]);
    }
  } else {
    // sum lambda G_i[r] + p_r = t[r] + tol ; sum lambda G_i[r] - q_r = t[r] - tol
    const size_t slack = 2 * d;
    for (size_t r = 0; r < d; ++r) {
      std::vector<Rat> up(k + slack, Rat(0)), down(k + slack, Rat(0));
      for (size_t i = 0; i < k; ++i) up[i] = down[i] = G[i][r];
      up[k + 2 * r] = 1;
      down[k + 2 * r + 1] = -1;
      A.push_back(std::move(up));
      b.push_back(t[r] + tol);
      A.push_back(std::move(down));
      b.push_back(t[r] - tol);
    }
  }
  std::vector<Rat> ones(A.empty() ? k : A[0].size(), Rat(0));
  for (size_t i = 0; i < k; ++i) ones[i] = 1;
  A.push_back(std::move(ones));
  b.push_back(1);
  return rational_feasible(std::move(A), std::move(b));
}

// Minimal generator list: duplicates removed, then every generator expressible
// as a convex combination of the remaining ones removed. The result is the
// canonical (sorted) vertex list of the generated polytope. Built
// incrementally so the feasibility systems stay as small as the running
// vertex set rather than the raw input.
inline std::vector<DistGenerator> canonicalize_convex(std::vector<DistGenerator> gens) {
  if (gens.empty()) throw EmptyConvexSet("canonicalize_convex needs a non-empty list");
  for (auto& g : gens) g.normalize();
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  std::vector<DistGenerator> vertices;
  for (auto& g : gens) {
    if (!vertices.empty() && in_hull(g, vertices)) continue;
    // adding g may make previous vertices interior
    std::vector<DistGenerator> kept;
    for (size_t i = 0; i < vertices.size(); ++i) {
      std::vector<DistGenerator> others;
      others.reserve(vertices.size());
      for (size_t j = 0; j < vertices.size(); ++j)
        if (j != i) others.push_back(vertices[j]);
      others.push_back(g);
      if (!in_hull(vertices[i], others)) kept.push_back(vertices[i]);
    }
    kept.push_back(std::move(g));
    vertices = std::move(kept);
  }
  std::sort(vertices.begin(), vertices.end());
  return vertices;
}

// Hull equality up to a membership slack (exact when tol = 0). Both lists are
// assumed normalized; empty lists denote the bottom row and are only equal to
// each other.
inline bool hulls_equal(const std::vector<DistGenerator>& a,
                        const std::vector<DistGenerator>& b, const Rat& tol = Rat(0)) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  for (const auto& g : a)
    if (!in_hull(g, b, tol)) return false;
  for (const auto& g : b)
    if (!in_hull(g, a, tol)) return false;
  return true;
}

}  // namespace timedeq
