#pragma once

// Brute-force reference implementations, written as direct transcriptions of
// the displayed rules and recursions. These deliberately avoid the closure
// and saturation kernels; they read raw step data and use only scalar
// arithmetic, generator lists and the shared hull-membership primitive.

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "timedeq/markov.hpp"
#include "timedeq/systems.hpp"
#include "timedeq/words.hpp"

namespace timedeq {

// ---------------------------------------------------------------------------
// Saturated steps of a non-deterministic system, by naive iteration of
//   x =(tau,0)=> x        and
//   x =(tau,t0)=> x', x' -(sigma,t1)-> y', y' =(tau,t2)=> y  with  t = t0+t1+t2
// restricted to t <= t_max; accepting moves close under a tau prefix.
// ---------------------------------------------------------------------------

struct RuleClosure {
  std::set<std::tuple<int, int, int64_t, int>> steps;  // (x, label, t, y)
  std::set<std::pair<int, int64_t>> accepts;           // (x, t)
};

inline RuleClosure rule_closure_weak_steps(const TimedSystem& sys, int64_t t_max) {
  if (sys.backend != Backend::NonDet)
    throw BackendMismatch("rule_closure_weak_steps expects the nondet backend");
  const int n = sys.n_states();

  std::vector<std::tuple<int, int, int64_t, int>> raw;
  std::vector<std::pair<int, int64_t>> raw_accepts;
  for (int64_t t : sys.durations) {
    const EffectEndo& e = sys.step.at(t);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y)
        for (int l = 0; l <= sys.n_labels(); ++l)
          if (!e.at(x, y).w[l].is_bot()) raw.emplace_back(x, l, t, y);
      if (!e.acc[x].is_bot()) raw_accepts.emplace_back(x, t);
    }
  }

  RuleClosure out;
  for (int x = 0; x < n; ++x) out.steps.insert({x, 0, 0, x});

  std::vector<std::vector<std::tuple<int, int64_t, int>>> raw_by_src(
      static_cast<size_t>(n));
  for (const auto& [x, l, t, y] : raw) raw_by_src[static_cast<size_t>(x)].emplace_back(l, t, y);

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::vector<std::pair<int64_t, int>>> tau_by_src(static_cast<size_t>(n));
    for (const auto& s : out.steps)
      if (std::get<1>(s) == 0)
        tau_by_src[static_cast<size_t>(std::get<0>(s))].emplace_back(std::get<2>(s),
                                                                     std::get<3>(s));
    for (int x = 0; x < n; ++x) {
      for (const auto& [t0, x1] : tau_by_src[static_cast<size_t>(x)]) {
        if (t0 > t_max) continue;
        for (const auto& [sigma, t1, y1] : raw_by_src[static_cast<size_t>(x1)]) {
          if (t0 + t1 > t_max) continue;
          for (const auto& [t2, y] : tau_by_src[static_cast<size_t>(y1)]) {
            int64_t t = t0 + t1 + t2;
            if (t > t_max) continue;
            if (out.steps.insert({x, sigma, t, y}).second) changed = true;
          }
        }
      }
    }
  }

  for (const auto& s : out.steps) {
    if (std::get<1>(s) != 0) continue;
    auto [x, l, t0, x1] = s;
    for (const auto& [ax, t1] : raw_accepts)
      if (ax == x1 && t0 + t1 <= t_max) out.accepts.insert({x, t0 + t1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weighted weak steps: the step-indexed recursion evaluated literally,
// joined over n <= depth.
// ---------------------------------------------------------------------------

struct WeightedWeakTable {
  // mat[t] is the flattened n*n matrix of saturated rows at total duration t;
  // accepts[t][x] the saturated accepting weight (tau closure, durations
  // summed, then a raw accepting move).
  int n = 0;
  std::vector<std::vector<LV>> mat;
  std::vector<std::vector<Scalar>> accepts;
  bool stabilized = false;

  const LV& at(int64_t t, int x, int y) const {
    return mat[static_cast<size_t>(t)][static_cast<size_t>(x) * n + y];
  }
};

inline WeightedWeakTable brute_weighted_weak(const TimedSystem& sys, int64_t t_max,
                                             int depth) {
  if (sys.backend == Backend::Convex)
    throw BackendMismatch("brute_weighted_weak expects a matrix backend");
  const ScalarQuantale& q = sys.base;
  const int n = sys.n_states();
  const int nl = sys.n_labels();
  auto idx = [n](int x, int y) { return static_cast<size_t>(x) * n + y; };

  auto bottom_table = [&] {
    return std::vector<std::vector<LV>>(
        static_cast<size_t>(t_max + 1),
        std::vector<LV>(static_cast<size_t>(n) * n, lv_bottom(q, nl)));
  };

  std::vector<std::vector<LV>> w = bottom_table();
  for (int x = 0; x < n; ++x) w[0][idx(x, x)] = lv_one(q, nl);
  std::vector<std::vector<LV>> sum = w;

  bool stabilized = false;
  for (int level = 1; level <= depth && !stabilized; ++level) {
    std::vector<std::vector<LV>> next = bottom_table();
    for (int64_t t = 0; t <= t_max; ++t) {
      for (int64_t u : sys.durations) {
        if (u > t) continue;
        const EffectEndo& raw = sys.step.at(u);
        const auto& cont = w[static_cast<size_t>(t - u)];
        for (int x = 0; x < n; ++x)
          for (int x2 = 0; x2 < n; ++x2) {
            const LV& step = raw.at(x, x2);
            if (lv_is_bottom(step)) continue;
            for (int y = 0; y < n; ++y) {
              const LV& rest = cont[idx(x2, y)];
              LV& cell = next[static_cast<size_t>(t)][idx(x, y)];
              // {s1,s2} = {sigma,tau} clause by clause
              cell.w[0] = q.join(cell.w[0], q.mult(step.w[0], rest.w[0]));
              for (int l = 1; l <= nl; ++l) {
                cell.w[l] = q.join(cell.w[l], q.mult(step.w[l], rest.w[0]));
                cell.w[l] = q.join(cell.w[l], q.mult(step.w[0], rest.w[l]));
              }
            }
          }
      }
    }
    // With join-distributive composition, an unchanged join dominates every
    // later stage, so sum stabilization is a sound exactness certificate.
    bool grew = false;
    for (size_t t = 0; t < sum.size(); ++t)
      for (size_t k = 0; k < sum[t].size(); ++k) {
        LV joined = lv_join(q, sum[t][k], next[t][k]);
        if (joined != sum[t][k]) grew = true;
        sum[t][k] = std::move(joined);
      }
    stabilized = !grew;
    w = std::move(next);
  }

  WeightedWeakTable out;
  out.n = n;
  out.mat = std::move(sum);
  out.stabilized = stabilized;
  if (sys.has_accept) {
    out.accepts.assign(static_cast<size_t>(t_max + 1),
                       std::vector<Scalar>(static_cast<size_t>(n), q.bottom()));
    for (int64_t t = 0; t <= t_max; ++t)
      for (int64_t u : sys.durations) {
        if (u > t) continue;
        const EffectEndo& raw = sys.step.at(u);
        for (int x = 0; x < n; ++x)
          for (int y = 0; y < n; ++y)
            out.accepts[static_cast<size_t>(t)][static_cast<size_t>(x)] =
                q.join(out.accepts[static_cast<size_t>(t)][static_cast<size_t>(x)],
                       q.mult(out.at(t - u, x, y).w[0], raw.acc[y]));
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convex weak combined steps: the step-indexed recursion with its
// side conditions ({s'',tau} = {s,s'} for every support pair), evaluated by
// literal path enumeration and joined over n <= depth.
// ---------------------------------------------------------------------------

struct ConvexWeakTable {
  // gens[t][x]: canonical generators of the weak combined step at duration t
  std::vector<std::vector<std::vector<DistGenerator>>> gens;
  bool stabilized = false;
};

inline ConvexWeakTable brute_convex_weak(const TimedSystem& sys, int64_t t_max,
                                         int depth) {
  if (sys.backend != Backend::Convex)
    throw BackendMismatch("brute_convex_weak expects the convex backend");
  const int n = sys.n_states();

  using Cell = std::vector<DistGenerator>;
  using Table = std::vector<std::vector<Cell>>;
  auto empty_table = [&] {
    return Table(static_cast<size_t>(t_max + 1), std::vector<Cell>(static_cast<size_t>(n)));
  };

  Table w = empty_table();
  for (int x = 0; x < n; ++x) {
    DistGenerator unit;
    unit.add(0, x, 1);
    w[0][static_cast<size_t>(x)] = {unit};
  }
  Table sum = w;

  bool stabilized = false;
  for (int level = 1; level <= depth && !stabilized; ++level) {
    Table next = empty_table();
    for (int64_t t = 0; t <= t_max; ++t) {
      for (int64_t u : sys.durations) {
        if (u > t) continue;
        const EffectEndo& raw = sys.step.at(u);
        const auto& cont = w[static_cast<size_t>(t - u)];
        for (int x = 0; x < n; ++x) {
          for (const DistGenerator& phi : raw.gens[static_cast<size_t>(x)]) {
            const size_t branches = phi.mass.size();
            bool dead = false;
            for (const auto& [l, y, mw] : phi.mass)
              if (cont[static_cast<size_t>(y)].empty()) dead = true;
            if (dead) continue;
            std::vector<size_t> choice(branches, 0);
            while (true) {
              bool legal = true;
              for (size_t bi = 0; bi < branches && legal; ++bi) {
                const auto& [l, y, mw] = phi.mass[bi];
                if (l == 0) continue;
                const DistGenerator& psi = cont[static_cast<size_t>(y)][choice[bi]];
                if (psi.accept != 0) legal = false;
                for (const auto& [l2, z, w2] : psi.mass)
                  if (l2 != 0) legal = false;
              }
              if (legal) {
                DistGenerator delta;
                delta.accept = phi.accept;
                for (size_t bi = 0; bi < branches; ++bi) {
                  const auto& [l, y, mw] = phi.mass[bi];
                  const DistGenerator& psi = cont[static_cast<size_t>(y)][choice[bi]];
                  if (l == 0) delta.accept += mw * psi.accept;
                  for (const auto& [l2, z, w2] : psi.mass)
                    delta.add(l == 0 ? l2 : l, z, mw * w2);
                }
                delta.normalize();
                next[static_cast<size_t>(t)][static_cast<size_t>(x)].push_back(
                    std::move(delta));
              }
              size_t k = 0;
              while (k < branches) {
                const auto& [l, y, mw] = phi.mass[k];
                if (++choice[k] < cont[static_cast<size_t>(y)].size()) break;
                choice[k] = 0;
                ++k;
              }
              if (k == branches) break;
            }
          }
        }
      }
      for (int x = 0; x < n; ++x) {
        auto& cell = next[static_cast<size_t>(t)][static_cast<size_t>(x)];
        if (!cell.empty()) cell = canonicalize_convex(std::move(cell));
      }
    }
    stabilized = next == w;
    for (int64_t t = 0; t <= t_max; ++t)
      for (int x = 0; x < n; ++x) {
        auto& into = sum[static_cast<size_t>(t)][static_cast<size_t>(x)];
        const auto& from = next[static_cast<size_t>(t)][static_cast<size_t>(x)];
        into.insert(into.end(), from.begin(), from.end());
        if (!into.empty()) into = canonicalize_convex(std::move(into));
      }
    w = std::move(next);
  }

  ConvexWeakTable out;
  out.gens = std::move(sum);
  out.stabilized = stabilized;
  return out;
}

// ---------------------------------------------------------------------------
// Language enumeration by depth-first path walking over raw steps (tl/utl)
// or the rule-closure/brute-weak steps (wtl/wutl).
// ---------------------------------------------------------------------------

namespace detail {

struct FlatStep {
  int from;
  int label;
  int64_t t;
  int to;
  Scalar weight;
};

struct FlatSteps {
  std::vector<FlatStep> steps;
  std::vector<std::tuple<int, int64_t, Scalar>> accepts;  // (state, duration, weight)
};

inline FlatSteps flatten_raw(const TimedSystem& sys) {
  FlatSteps out;
  const int n = sys.n_states();
  for (int64_t t : sys.durations) {
    const EffectEndo& e = sys.step.at(t);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y)
        for (int l = 0; l <= sys.n_labels(); ++l)
          if (!e.at(x, y).w[l].is_bot())
            out.steps.push_back({x, l, t, y, e.at(x, y).w[l]});
      if (!e.acc[x].is_bot()) out.accepts.emplace_back(x, t, e.acc[x]);
    }
  }
  return out;
}

inline FlatSteps flatten_weak(const TimedSystem& sys, int64_t t_max, int depth) {
  FlatSteps out;
  if (sys.backend == Backend::NonDet) {
    auto closure = rule_closure_weak_steps(sys, t_max);
    for (const auto& [x, l, t, y] : closure.steps)
      out.steps.push_back({x, l, t, y, sys.base.one()});
    for (const auto& [x, t] : closure.accepts)
      out.accepts.emplace_back(x, t, sys.base.one());
    return out;
  }
  auto table = brute_weighted_weak(sys, t_max, depth);
  for (int64_t t = 0; t <= t_max; ++t)
    for (int x = 0; x < table.n; ++x) {
      for (int y = 0; y < table.n; ++y) {
        const LV& cell = table.at(t, x, y);
        for (int l = 0; l < static_cast<int>(cell.w.size()); ++l)
          if (!cell.w[static_cast<size_t>(l)].is_bot())
            out.steps.push_back({x, l, t, y, cell.w[static_cast<size_t>(l)]});
      }
      if (!table.accepts.empty() &&
          !table.accepts[static_cast<size_t>(t)][static_cast<size_t>(x)].is_bot())
        out.accepts.emplace_back(
            x, t, table.accepts[static_cast<size_t>(t)][static_cast<size_t>(x)]);
    }
  return out;
}

}  // namespace detail

// Accepted words of one state within the bound, with quantale weights
// (Boolean weights for the nondet backend). Time-abstract words only bound
// the length; the time budget is widened so that every duration assignment
// of a length-bounded word is enumerated (weak steps need at most simple
// silent chains around each letter, so (2|X|+1) durations per letter cover
// the minimal realizations).
inline std::map<TimedWord, Scalar> brute_languages(const TimedSystem& sys, int state,
                                                   LangMode mode, LangBound bound) {
  if (!sys.has_accept) throw NoAcceptance("system has no accepting data");
  if (sys.backend == Backend::Convex)
    throw BackendMismatch("brute_languages covers the matrix backends");
  const ScalarQuantale& q = sys.base;
  bool weak = mode == LangMode::WTL || mode == LangMode::WUTL;
  const int64_t max_d = std::max<int64_t>(sys.max_duration(), 1);
  int64_t time_budget = bound.max_time;
  int64_t closure_cap = bound.max_time;
  if (mode == LangMode::UTL) time_budget = (bound.max_len + 2) * max_d;
  if (mode == LangMode::WUTL) {
    closure_cap = (bound.max_len + 2) * (2 * sys.n_states() + 1) * max_d;
    time_budget = closure_cap;
  }
  auto flat = weak ? detail::flatten_weak(sys, closure_cap, 2 * sys.n_states() + 2)
                   : detail::flatten_raw(sys);

  std::map<TimedWord, Scalar> timed;
  struct Frame {
    int state;
    TimedWord word;
    Scalar weight;
  };
  std::vector<Frame> stack;
  stack.push_back({state, {}, q.one()});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    int64_t used = f.word.total_time();
    for (const auto& [x, t, w] : flat.accepts) {
      if (x != f.state || used + t > time_budget) continue;
      TimedWord done = f.word;
      done.durations.push_back(t);
      Scalar total = q.mult(f.weight, w);
      auto [it, fresh] = timed.emplace(done, total);
      if (!fresh) it->second = q.join(it->second, total);
    }
    if (static_cast<int>(f.word.labels.size()) >= bound.max_len) continue;
    for (const auto& s : flat.steps) {
      if (s.from != f.state || used + s.t > time_budget) continue;
      Frame g;
      g.state = s.to;
      g.word = f.word;
      g.word.durations.push_back(s.t);
      g.word.labels.push_back(s.label);
      g.weight = q.mult(f.weight, s.weight);
      stack.push_back(std::move(g));
    }
  }

  if (mode == LangMode::TL || mode == LangMode::WTL) return timed;
  std::map<TimedWord, Scalar> untimed;
  for (const auto& [w, weight] : timed) {
    TimedWord u;
    u.labels = w.labels;
    auto [it, fresh] = untimed.emplace(std::move(u), weight);
    if (!fresh) it->second = q.join(it->second, weight);
  }
  return untimed;
}

// ---------------------------------------------------------------------------
// Statistical cross-check of hitting probabilities.
// ---------------------------------------------------------------------------

struct MonteCarloEstimate {
  double estimate = 0;
  double lo = 0, hi = 0;  // Wilson 95% interval
  size_t hits = 0, trials = 0;
};

inline MonteCarloEstimate monte_carlo_hitting(const MarkovChain& chain, int start,
                                              const std::set<int>& targets, size_t trials,
                                              int horizon, uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  const int n = chain.size();
  std::vector<std::vector<double>> cdf(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double acc = 0;
    for (int j = 0; j < n; ++j) {
      acc += rat_to_double(chain.P[static_cast<size_t>(i)][static_cast<size_t>(j)]);
      cdf[static_cast<size_t>(i)].push_back(acc);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  size_t hits = 0;
  for (size_t trial = 0; trial < trials; ++trial) {
    int x = start;
    for (int step = 0; step <= horizon; ++step) {
      if (targets.count(x)) {
        ++hits;
        break;
      }
      double r = unif(rng);
      const auto& row = cdf[static_cast<size_t>(x)];
      x = static_cast<int>(std::lower_bound(row.begin(), row.end(), r) - row.begin());
      if (x >= n) x = n - 1;
    }
  }
  MonteCarloEstimate est;
  est.hits = hits;
  est.trials = trials;
  est.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  const double z = 1.959963984540054;
  double nn = static_cast<double>(trials);
  double ph = est.estimate;
  double denom = 1.0 + z * z / nn;
  double center = (ph + z * z / (2 * nn)) / denom;
  double half = z * std::sqrt(ph * (1 - ph) / nn + z * z / (4 * nn * nn)) / denom;
  est.lo = std::max(0.0, center - half);
  est.hi = std::min(1.0, center + half);
  return est;
}

}  // namespace timedeq

