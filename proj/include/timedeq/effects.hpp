#pragma once

// Kleisli endomorphism arithmetic for the three backends. Matrix backends
// (NonDet, QWeighted) share one representation over the labelled quantale;
// the convex backend keeps per-state generator lists of sub-distributions.

#include <algorithm>
#include <string>
#include <vector>

#include "timedeq/algebra.hpp"
#include "timedeq/convex.hpp"
#include "timedeq/errors.hpp"

namespace timedeq {

enum class Backend { NonDet, QWeighted, Convex };

inline std::string backend_name(Backend b) {
  switch (b) {
    case Backend::NonDet: return "nondet";
    case Backend::QWeighted: return "weighted";
    case Backend::Convex: return "convex";
  }
  return "?";
}

class EffectEndo {
 public:
  Backend backend = Backend::NonDet;
  ScalarQuantale base;  // Bool for NonDet and Convex
  int dim = 0;
  int n_labels = 0;
  std::vector<LV> mat;                           // dim*dim, matrix backends
  std::vector<Scalar> acc;                       // dim, matrix backends
  std::vector<std::vector<DistGenerator>> gens;  // dim rows, convex backend

  bool is_matrix() const { return backend != Backend::Convex; }

  LV& at(int x, int y) { return mat[static_cast<size_t>(x) * dim + y]; }
  const LV& at(int x, int y) const { return mat[static_cast<size_t>(x) * dim + y]; }

  static EffectEndo bottom(Backend backend, const ScalarQuantale& base, int dim,
                           int n_labels) {
    EffectEndo e;
    e.backend = backend;
    e.base = base;
    e.dim = dim;
    e.n_labels = n_labels;
    if (e.is_matrix()) {
      e.mat.assign(static_cast<size_t>(dim) * dim, lv_bottom(base, n_labels));
      e.acc.assign(dim, base.bottom());
    } else {
      e.gens.assign(dim, {});
    }
    return e;
  }

  // Kleisli unit: tau self-loop of weight one, no acceptance.
  static EffectEndo identity(Backend backend, const ScalarQuantale& base, int dim,
                             int n_labels) {
    EffectEndo e = bottom(backend, base, dim, n_labels);
    for (int x = 0; x < dim; ++x) {
      if (e.is_matrix()) {
        e.at(x, x) = lv_one(base, n_labels);
      } else {
        DistGenerator unit;
        unit.add(0, x, 1);
        e.gens[x].push_back(std::move(unit));
      }
    }
    return e;
  }

  void set_step(int x, int label, int y, Scalar w) { at(x, y).w[label] = std::move(w); }
  void set_accept(int x, Scalar w) { acc[x] = std::move(w); }

  friend bool operator==(const EffectEndo& a, const EffectEndo& b) {
    if (a.backend != b.backend || a.dim != b.dim || a.n_labels != b.n_labels)
      return false;
    if (a.is_matrix()) return a.mat == b.mat && a.acc == b.acc;
    return a.gens == b.gens;  // rows are kept canonical
  }
  friend bool operator!=(const EffectEndo& a, const EffectEndo& b) { return !(a == b); }
};

namespace detail {

inline void require_compatible(const EffectEndo& f, const EffectEndo& g) {
  if (f.backend != g.backend)
    throw BackendMismatch("cannot combine " + backend_name(f.backend) + " with " +
                          backend_name(g.backend));
  if (f.dim != g.dim || f.n_labels != g.n_labels)
    throw BackendMismatch("dimension or alphabet mismatch");
}

// Convex composition. Continuations are resolved independently per support
// branch (label, state) of the stage distribution; per-state resolution
// would be coarser than the monad multiplication and loses associativity.
// `guarded` restricts choices to those satisfying the weak-step side
// condition (every support pair composable, acceptance only after tau)
// instead of silently dropping the incomposable mass.
inline std::vector<DistGenerator> convex_compose_row(
    const std::vector<DistGenerator>& f_row, const EffectEndo& g, bool guarded) {
  std::set<DistGenerator> dedup;  // many choice tuples collapse to one composite
  for (const auto& phi : f_row) {
    const size_t branches = phi.mass.size();
    bool dead = false;
    for (const auto& [l, y, w] : phi.mass)
      if (g.gens[y].empty()) dead = true;
    if (dead) continue;  // no choice function exists through an empty row

    std::vector<size_t> choice(branches, 0);
    while (true) {
      bool legal = true;
      if (guarded) {
        for (size_t bi = 0; bi < branches && legal; ++bi) {
          const auto& [l, y, w] = phi.mass[bi];
          if (l == 0) continue;
          const DistGenerator& psi = g.gens[y][choice[bi]];
          if (psi.accept != 0) legal = false;
          for (const auto& [l2, z, w2] : psi.mass)
            if (l2 != 0) legal = false;
        }
      }
      if (legal) {
        DistGenerator delta;
        delta.accept = phi.accept;
        for (size_t bi = 0; bi < branches; ++bi) {
          const auto& [l, y, w] = phi.mass[bi];
          const DistGenerator& psi = g.gens[y][choice[bi]];
          if (l == 0) delta.accept += w * psi.accept;
          for (const auto& [l2, z, w2] : psi.mass) {
            if (l == 0) {
              delta.add(l2, z, w * w2);
            } else if (l2 == 0) {
              delta.add(l, z, w * w2);
            }
            // two visible labels: incomposable, mass dropped
          }
        }
        delta.normalize();
        dedup.insert(std::move(delta));
      }
      // next choice tuple
      size_t k = 0;
      while (k < branches) {
        const auto& [l, y, w] = phi.mass[k];
        if (++choice[k] < g.gens[y].size()) break;
        choice[k] = 0;
        ++k;
      }
      if (k == branches) break;
    }
  }
  std::vector<DistGenerator> out(dedup.begin(), dedup.end());
  if (!out.empty()) out = canonicalize_convex(std::move(out));
  return out;
}

inline EffectEndo compose_impl(const EffectEndo& f, const EffectEndo& g, bool guarded) {
  require_compatible(f, g);
  EffectEndo out = EffectEndo::bottom(f.backend, f.base, f.dim, f.n_labels);
  if (f.is_matrix()) {
    const ScalarQuantale& q = f.base;
    for (int x = 0; x < f.dim; ++x) {
      Scalar a = f.acc[x];
      for (int y = 0; y < f.dim; ++y) {
        const LV& fxy = f.at(x, y);
        if (lv_is_bottom(fxy)) continue;
        for (int z = 0; z < f.dim; ++z)
          out.at(x, z) = lv_join(q, out.at(x, z), lv_mult(q, fxy, g.at(y, z)));
        a = q.join(a, q.mult(fxy.w[0], g.acc[y]));
      }
      out.acc[x] = a;
    }
  } else {
    for (int x = 0; x < f.dim; ++x)
      out.gens[x] = convex_compose_row(f.gens[x], g, guarded);
  }
  return out;
}

}  // namespace detail

// compose(f, g): run f, then g (the Kleisli composite g o f).
inline EffectEndo compose(const EffectEndo& f, const EffectEndo& g) {
  return detail::compose_impl(f, g, /*guarded=*/false);
}

// Weak-step composition for the convex backend: one raw stage f followed by
// the continuation g, admitting only choices that satisfy the saturated-step
// side conditions. Coincides with compose() on matrix backends.
inline EffectEndo compose_weak_stage(const EffectEndo& f, const EffectEndo& g) {
  return detail::compose_impl(f, g, /*guarded=*/true);
}

inline EffectEndo join(const EffectEndo& f, const EffectEndo& g) {
  detail::require_compatible(f, g);
  EffectEndo out = EffectEndo::bottom(f.backend, f.base, f.dim, f.n_labels);
  if (f.is_matrix()) {
    for (size_t i = 0; i < f.mat.size(); ++i)
      out.mat[i] = lv_join(f.base, f.mat[i], g.mat[i]);
    for (int x = 0; x < f.dim; ++x) out.acc[x] = f.base.join(f.acc[x], g.acc[x]);
  } else {
    for (int x = 0; x < f.dim; ++x) {
      std::vector<DistGenerator> both = f.gens[x];
      both.insert(both.end(), g.gens[x].begin(), g.gens[x].end());
      if (!both.empty()) both = canonicalize_convex(std::move(both));
      out.gens[x] = std::move(both);
    }
  }
  return out;
}

inline bool leq(const EffectEndo& f, const EffectEndo& g) {
  detail::require_compatible(f, g);
  if (f.is_matrix()) {
    for (size_t i = 0; i < f.mat.size(); ++i)
      if (!lv_leq(f.base, f.mat[i], g.mat[i])) return false;
    for (int x = 0; x < f.dim; ++x)
      if (!f.base.leq(f.acc[x], g.acc[x])) return false;
    return true;
  }
  for (int x = 0; x < f.dim; ++x) {
    if (f.gens[x].empty()) continue;
    if (g.gens[x].empty()) return false;
    for (const auto& gen : f.gens[x])
      if (!in_hull(gen, g.gens[x])) return false;
  }
  return true;
}

// Least saturated endomorphism above f (the reflexive-transitive closure),
// via the Floyd-Warshall-Kleene elimination over the labelled quantale.
inline EffectEndo endo_star(const EffectEndo& f) {
  if (!f.is_matrix())
    throw UnsupportedExact("convex backend has no exact star; use bounded_star");
  const ScalarQuantale& q = f.base;
  const int n = f.dim;
  std::vector<LV> cur = f.mat;
  std::vector<LV> next = cur;
  auto idx = [n](int i, int j) { return static_cast<size_t>(i) * n + j; };
  for (int k = 0; k < n; ++k) {
    LV skk = lv_star(q, cur[idx(k, k)]);
    for (int i = 0; i < n; ++i) {
      const LV via = lv_mult(q, cur[idx(i, k)], skk);
      for (int j = 0; j < n; ++j)
        next[idx(i, j)] =
            lv_join(q, cur[idx(i, j)], lv_mult(q, via, cur[idx(k, j)]));
    }
    cur = next;
  }
  EffectEndo out = EffectEndo::identity(f.backend, q, n, f.n_labels);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.at(i, j) = lv_join(q, out.at(i, j), cur[idx(i, j)]);
  for (int x = 0; x < n; ++x) {
    Scalar a = q.bottom();
    for (int y = 0; y < n; ++y) a = q.join(a, q.mult(out.at(x, y).w[0], f.acc[y]));
    out.acc[x] = a;
  }
  return out;
}

struct BoundedStarResult {
  EffectEndo endo;
  bool converged = false;
};

// Join of f^0..f^depth. For the convex backend powers are built with the
// weak-stage composition, matching the step-indexed saturation recursion.
inline BoundedStarResult bounded_star(const EffectEndo& f, int depth,
                                      const Rat& tolerance = Rat(0)) {
  EffectEndo id = EffectEndo::identity(f.backend, f.base, f.dim, f.n_labels);
  if (depth <= 0) return {id, leq(f, id)};
  EffectEndo sum = id;
  EffectEndo pow = id;
  bool converged = false;
  for (int k = 1; k <= depth; ++k) {
    pow = f.is_matrix() ? compose(pow, f) : compose_weak_stage(f, pow);
    EffectEndo next = join(sum, pow);
    bool same;
    if (f.is_matrix()) {
      same = next == sum;
    } else {
      same = true;
      for (int x = 0; x < f.dim && same; ++x)
        same = hulls_equal(next.gens[x], sum.gens[x], tolerance);
    }
    sum = std::move(next);
    if (k == depth) converged = same;
    if (same && f.is_matrix()) {
      converged = true;  // matrix powers cannot re-escape a stabilized join
      break;
    }
  }
  return {sum, converged};
}

}  // namespace timedeq
