#pragma once

// Shared fixtures and generators for the test suites.

#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "timedeq/effects.hpp"
#include "timedeq/systems.hpp"

namespace timedeq::testing {

struct Edge {
  int from;
  int label;  // 0 = tau
  int to;
};

inline EffectEndo matrix_endo(Backend backend, const ScalarQuantale& q, int dim,
                              int n_labels, const std::vector<Edge>& edges,
                              const std::vector<std::pair<int, Scalar>>& accepts = {}) {
  EffectEndo e = EffectEndo::bottom(backend, q, dim, n_labels);
  for (const auto& edge : edges) e.set_step(edge.from, edge.label, edge.to, q.one());
  for (const auto& [x, w] : accepts) e.set_accept(x, w);
  return e;
}

// The running saturation example: three states, sigma = 1, theta = 2.
inline EffectEndo fig2_left() {
  auto q = ScalarQuantale(ScalarKind::Bool);
  return matrix_endo(Backend::NonDet, q, 3, 2,
                     {{0, 0, 0}, {0, 1, 1}, {0, 0, 2}, {1, 0, 2}, {2, 2, 2}});
}

inline EffectEndo fig2_right() {
  auto q = ScalarQuantale(ScalarKind::Bool);
  return matrix_endo(Backend::NonDet, q, 3, 2,
                     {{0, 0, 0}, {0, 1, 1}, {0, 0, 2}, {0, 1, 2}, {0, 2, 2},
                      {1, 0, 1}, {1, 0, 2}, {1, 2, 2},
                      {2, 2, 2}, {2, 0, 2}});
}

inline Scalar random_weight(const ScalarQuantale& q, std::mt19937_64& rng) {
  switch (q.kind()) {
    case ScalarKind::Bool:
      return q.one();
    case ScalarKind::NatInfMaxPlus: {
      std::uniform_int_distribution<int> d(0, 6);
      int v = d(rng);
      return v == 6 ? Scalar::inf() : Scalar::fin(v);
    }
    case ScalarKind::UnitMinTimes: {
      std::uniform_int_distribution<int> num(0, 4);
      return Scalar::fin(Rat(num(rng), 4));
    }
  }
  return q.one();
}

inline EffectEndo random_matrix_endo(Backend backend, const ScalarQuantale& q, int dim,
                                     int n_labels, std::mt19937_64& rng,
                                     double density = 0.35, double accept_prob = 0.0) {
  EffectEndo e = EffectEndo::bottom(backend, q, dim, n_labels);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int x = 0; x < dim; ++x) {
    for (int y = 0; y < dim; ++y)
      for (int l = 0; l <= n_labels; ++l)
        if (coin(rng) < density) e.set_step(x, l, y, random_weight(q, rng));
    if (coin(rng) < accept_prob) e.set_accept(x, random_weight(q, rng));
  }
  return e;
}

// Random sub-distribution over (label, state) pairs with denominator 8.
inline DistGenerator random_generator(int dim, int n_labels, std::mt19937_64& rng,
                                      bool with_accept) {
  std::uniform_int_distribution<int> nsup(1, 3);
  std::uniform_int_distribution<int> lab(0, n_labels);
  std::uniform_int_distribution<int> st(0, dim - 1);
  DistGenerator g;
  int parts = nsup(rng);
  std::vector<int> cuts{0, 8};
  std::uniform_int_distribution<int> cut(0, 8);
  for (int i = 0; i < parts; ++i) cuts.push_back(cut(rng));
  std::sort(cuts.begin(), cuts.end());
  size_t slot = 0;
  for (size_t i = 0; i + 1 < cuts.size() && slot <= static_cast<size_t>(parts); ++i, ++slot) {
    Rat w(cuts[i + 1] - cuts[i], 8);
    if (w == 0) continue;
    if (with_accept && slot == 0) {
      g.accept += w / 2;
      g.add(lab(rng), st(rng), w / 2);
    } else {
      g.add(lab(rng), st(rng), w);
    }
  }
  g.normalize();
  return g;
}

// Random convex endo with every row non-empty (a proper Kleisli arrow).
inline EffectEndo random_convex_endo(int dim, int n_labels, std::mt19937_64& rng,
                                     bool with_accept = false) {
  EffectEndo e = EffectEndo::bottom(Backend::Convex, ScalarQuantale(ScalarKind::Bool),
                                    dim, n_labels);
  std::uniform_int_distribution<int> ngen(1, 2);
  for (int x = 0; x < dim; ++x) {
    int k = ngen(rng);
    std::vector<DistGenerator> row;
    for (int i = 0; i < k; ++i) row.push_back(random_generator(dim, n_labels, rng, with_accept));
    e.gens[x] = canonicalize_convex(std::move(row));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Random timed systems.
// ---------------------------------------------------------------------------

struct SystemOptions {
  int n_states = 4;
  int n_labels = 2;
  std::vector<int64_t> durations = {0, 1};
  double density = 0.3;
  double accept_prob = 0.0;
  bool tau_free = false;
  bool zero_cost_silent = false;  // tau steps at duration 0 carry the unit weight
};

inline TimedSystem random_system(Backend backend, const ScalarQuantale& q,
                                 const SystemOptions& opt, std::mt19937_64& rng) {
  TimedSystem sys;
  sys.backend = backend;
  sys.base = q;
  sys.quantale_key = backend == Backend::QWeighted
                         ? (q.kind() == ScalarKind::Bool             ? "bool"
                            : q.kind() == ScalarKind::NatInfMaxPlus ? "nat-inf-max-plus"
                                                                    : "unit-min-times")
                         : "bool";
  for (int i = 0; i < opt.n_states; ++i) sys.states.push_back("q" + std::to_string(i));
  for (int i = 0; i < opt.n_labels; ++i) sys.alphabet.push_back(std::string(1, 'a' + i));
  sys.durations = opt.durations;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int64_t t : sys.durations) {
    if (backend == Backend::Convex) {
      EffectEndo e = EffectEndo::bottom(backend, q, opt.n_states, opt.n_labels);
      std::uniform_int_distribution<int> ngen(0, 2);
      for (int x = 0; x < opt.n_states; ++x) {
        int k = ngen(rng);
        std::vector<DistGenerator> row;
        for (int i = 0; i < k; ++i)
          row.push_back(random_generator(opt.n_states, opt.n_labels, rng,
                                         coin(rng) < opt.accept_prob));
        if (!row.empty()) e.gens[x] = canonicalize_convex(std::move(row));
      }
      sys.step.emplace(t, std::move(e));
      continue;
    }
    EffectEndo e = EffectEndo::bottom(backend, q, opt.n_states, opt.n_labels);
    for (int x = 0; x < opt.n_states; ++x) {
      for (int y = 0; y < opt.n_states; ++y)
        for (int l = opt.tau_free ? 1 : 0; l <= opt.n_labels; ++l)
          if (coin(rng) < opt.density) {
            Scalar w = random_weight(q, rng);
            if (opt.zero_cost_silent && l == 0 && t == 0) w = q.one();
            if (w.is_bot()) w = q.one();
            e.set_step(x, l, y, w);
          }
      if (coin(rng) < opt.accept_prob) {
        Scalar w = random_weight(q, rng);
        e.set_accept(x, w.is_bot() ? q.one() : w);
      }
    }
    sys.step.emplace(t, std::move(e));
  }
  sys.has_accept = false;
  for (const auto& [t, e] : sys.step) {
    if (e.is_matrix()) {
      for (const auto& a : e.acc)
        if (!a.is_bot()) sys.has_accept = true;
    } else {
      for (const auto& row : e.gens)
        for (const auto& g : row)
          if (g.accept != 0) sys.has_accept = true;
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Set-based reference semantics for the non-deterministic backend.
// ---------------------------------------------------------------------------

struct SetEndo {
  int dim = 0;
  std::set<std::tuple<int, int, int>> steps;  // (from, label, to)
  std::set<int> accepts;
};

inline SetEndo to_sets(const EffectEndo& e) {
  SetEndo s;
  s.dim = e.dim;
  for (int x = 0; x < e.dim; ++x) {
    for (int y = 0; y < e.dim; ++y)
      for (int l = 0; l <= e.n_labels; ++l)
        if (!e.at(x, y).w[l].is_bot()) s.steps.insert({x, l, y});
    if (!e.acc[x].is_bot()) s.accepts.insert(x);
  }
  return s;
}

inline SetEndo set_compose(const SetEndo& f, const SetEndo& g) {
  SetEndo out;
  out.dim = f.dim;
  for (const auto& [x, l1, y] : f.steps) {
    for (const auto& [y2, l2, z] : g.steps) {
      if (y2 != y) continue;
      if (l1 == 0) out.steps.insert({x, l2, z});
      if (l2 == 0) out.steps.insert({x, l1, z});
    }
    if (l1 == 0 && g.accepts.count(y)) out.accepts.insert(x);
  }
  for (int a : f.accepts) out.accepts.insert(a);
  return out;
}

inline SetEndo set_join(const SetEndo& f, const SetEndo& g) {
  SetEndo out = f;
  out.steps.insert(g.steps.begin(), g.steps.end());
  out.accepts.insert(g.accepts.begin(), g.accepts.end());
  return out;
}

inline bool set_leq(const SetEndo& f, const SetEndo& g) {
  return std::includes(g.steps.begin(), g.steps.end(), f.steps.begin(), f.steps.end()) &&
         std::includes(g.accepts.begin(), g.accepts.end(), f.accepts.begin(),
                       f.accepts.end());
}

}  // namespace timedeq::testing
