#pragma once

// Homogeneous finite Markov chains: hitting probabilities (exact rational
// solve and value iteration), the hitting-recurrence check, and coarsest
// lumping by refinement over class-hitting vectors.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "timedeq/errors.hpp"
#include "timedeq/partition.hpp"
#include "timedeq/rational.hpp"

namespace timedeq {

struct MarkovChain {
  std::vector<std::string> states;
  std::vector<std::vector<Rat>> P;  // row-stochastic

  int size() const { return static_cast<int>(states.size()); }

  int state_index(const std::string& name) const {
    for (size_t i = 0; i < states.size(); ++i)
      if (states[i] == name) return static_cast<int>(i);
    throw ValidationError("unknown state '" + name + "'");
  }
};

inline MarkovChain load_chain(const nlohmann::ordered_json& doc) {
  MarkovChain c;
  if (!doc.contains("states") || !doc.contains("rows"))
    throw ValidationError("chain document needs 'states' and 'rows'");
  for (const auto& s : doc.at("states")) c.states.push_back(s.get<std::string>());
  const auto& rows = doc.at("rows");
  if (rows.size() != c.states.size())
    throw ValidationError("row count does not match the state count");
  for (const auto& row : rows) {
    if (row.size() != c.states.size())
      throw ValidationError("row length does not match the state count");
    std::vector<Rat> r;
    Rat total(0);
    for (const auto& v : row) {
      Rat w = v.is_string() ? parse_rat(v.get<std::string>()) : Rat(v.get<int64_t>());
      if (w < 0 || w > 1) throw ValidationError("transition probability outside [0,1]");
      total += w;
      r.push_back(std::move(w));
    }
    if (total != 1) throw ValidationError("row does not sum to one");
    c.P.push_back(std::move(r));
  }
  return c;
}

enum class HittingMethod { Exact, ValueIteration };

struct HittingVector {
  std::vector<int> target;       // sorted member list of C
  std::vector<Rat> exact;        // populated in exact mode
  std::vector<double> value;     // always populated
  bool is_exact = false;
  int iterations = 0;
};

namespace detail {

// States from which C is unreachable along positive-probability paths.
inline std::vector<bool> can_reach(const MarkovChain& c, const std::set<int>& targets) {
  const int n = c.size();
  std::vector<bool> reach(static_cast<size_t>(n), false);
  for (int t : targets) reach[static_cast<size_t>(t)] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (reach[static_cast<size_t>(i)]) continue;
      for (int j = 0; j < n; ++j)
        if (c.P[static_cast<size_t>(i)][static_cast<size_t>(j)] > 0 &&
            reach[static_cast<size_t>(j)]) {
          reach[static_cast<size_t>(i)] = true;
          changed = true;
          break;
        }
    }
  }
  return reach;
}

// Gaussian elimination for Ax = b over exact rationals.
inline std::vector<Rat> solve_linear(std::vector<std::vector<Rat>> A, std::vector<Rat> b) {
  const size_t n = A.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && A[pivot][col] == 0) ++pivot;
    if (pivot == n) throw ValidationError("singular hitting system");
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    Rat p = A[col][col];
    for (size_t j = col; j < n; ++j) A[col][j] /= p;
    b[col] /= p;
    for (size_t i = 0; i < n; ++i) {
      if (i == col || A[i][col] == 0) continue;
      Rat f = A[i][col];
      for (size_t j = col; j < n; ++j) A[i][j] -= f * A[col][j];
      b[i] -= f * b[col];
    }
  }
  return b;
}

}  // namespace detail

// Minimal non-negative solution of
//   p_i = 1 (i in C),  p_i = sum_j P(i,j) p_j (otherwise),
// obtained by zeroing the states that cannot reach C and solving the
// remainder exactly; or by monotone value iteration from the indicator of C.
inline HittingVector hitting(const MarkovChain& c, const std::set<int>& targets,
                             HittingMethod method = HittingMethod::Exact,
                             double tol = 1e-12) {
  if (targets.empty()) throw ValidationError("EmptyTarget: hitting needs a non-empty C");
  const int n = c.size();
  for (int t : targets)
    if (t < 0 || t >= n) throw ValidationError("target state out of range");

  HittingVector out;
  out.target.assign(targets.begin(), targets.end());

  if (method == HittingMethod::Exact) {
    auto reach = detail::can_reach(c, targets);
    std::vector<int> unknown;
    for (int i = 0; i < n; ++i)
      if (!targets.count(i) && reach[static_cast<size_t>(i)]) unknown.push_back(i);
    std::vector<Rat> p(static_cast<size_t>(n), Rat(0));
    for (int t : targets) p[static_cast<size_t>(t)] = 1;
    if (!unknown.empty()) {
      const size_t m = unknown.size();
      std::vector<std::vector<Rat>> A(m, std::vector<Rat>(m, Rat(0)));
      std::vector<Rat> b(m, Rat(0));
      for (size_t r = 0; r < m; ++r) {
        int i = unknown[r];
        A[r][r] = 1;
        for (int j = 0; j < n; ++j) {
          const Rat& w = c.P[static_cast<size_t>(i)][static_cast<size_t>(j)];
          if (w == 0) continue;
          auto it = std::lower_bound(unknown.begin(), unknown.end(), j);
          if (it != unknown.end() && *it == j) {
            A[r][static_cast<size_t>(it - unknown.begin())] -= w;
          } else if (targets.count(j)) {
            b[r] += w;
          }
        }
      }
      auto x = detail::solve_linear(std::move(A), std::move(b));
      for (size_t r = 0; r < m; ++r) p[static_cast<size_t>(unknown[r])] = x[r];
    }
    out.exact = std::move(p);
    out.is_exact = true;
    out.value.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      out.value[static_cast<size_t>(i)] = rat_to_double(out.exact[static_cast<size_t>(i)]);
    return out;
  }

  std::vector<double> p(static_cast<size_t>(n), 0.0);
  for (int t : targets) p[static_cast<size_t>(t)] = 1.0;
  double delta = 1.0;
  while (delta >= tol) {
    delta = 0.0;
    std::vector<double> next(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      if (targets.count(i)) {
        next[static_cast<size_t>(i)] = 1.0;
        continue;
      }
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += rat_to_double(c.P[static_cast<size_t>(i)][static_cast<size_t>(j)]) *
               p[static_cast<size_t>(j)];
      next[static_cast<size_t>(i)] = acc;
      delta = std::max(delta, std::abs(acc - p[static_cast<size_t>(i)]));
    }
    p = std::move(next);
    ++out.iterations;
    if (out.iterations > 2'000'000)
      throw BudgetError("value iteration failed to converge");
  }
  out.value = std::move(p);
  return out;
}

// The k-th value-iteration iterate, for monotonicity checks.
inline std::vector<double> value_iteration_step(const MarkovChain& c,
                                                const std::set<int>& targets, int k) {
  const int n = c.size();
  std::vector<double> p(static_cast<size_t>(n), 0.0);
  for (int t : targets) p[static_cast<size_t>(t)] = 1.0;
  for (int step = 0; step < k; ++step) {
    std::vector<double> next(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      if (targets.count(i)) {
        next[static_cast<size_t>(i)] = 1.0;
        continue;
      }
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += rat_to_double(c.P[static_cast<size_t>(i)][static_cast<size_t>(j)]) *
               p[static_cast<size_t>(j)];
      next[static_cast<size_t>(i)] = acc;
    }
    p = std::move(next);
  }
  return p;
}

struct RecurrenceReport {
  // max over i notin C of | p_i - sup_{n<=n_max} sum_j p_j * P^n(i,j) |
  Rat max_deviation{0};
  int n_max = 0;
};

inline RecurrenceReport check_lemma_recurrence(const MarkovChain& c,
                                               const std::set<int>& targets, int n_max) {
  RecurrenceReport report;
  report.n_max = n_max;
  if (targets.empty()) return report;
  auto h = hitting(c, targets, HittingMethod::Exact);
  const int n = c.size();
  // P^k rows, iterated exactly
  std::vector<std::vector<Rat>> pk(static_cast<size_t>(n),
                                   std::vector<Rat>(static_cast<size_t>(n), Rat(0)));
  for (int i = 0; i < n; ++i) pk[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;
  std::vector<Rat> best(static_cast<size_t>(n), Rat(0));
  for (int k = 0; k <= n_max; ++k) {
    for (int i = 0; i < n; ++i) {
      Rat s(0);
      for (int j = 0; j < n; ++j)
        s += h.exact[static_cast<size_t>(j)] * pk[static_cast<size_t>(i)][static_cast<size_t>(j)];
      if (s > best[static_cast<size_t>(i)]) best[static_cast<size_t>(i)] = s;
    }
    if (k == n_max) break;
    std::vector<std::vector<Rat>> next(static_cast<size_t>(n),
                                       std::vector<Rat>(static_cast<size_t>(n), Rat(0)));
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        const Rat& w = pk[static_cast<size_t>(i)][static_cast<size_t>(l)];
        if (w == 0) continue;
        for (int j = 0; j < n; ++j)
          next[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
              w * c.P[static_cast<size_t>(l)][static_cast<size_t>(j)];
      }
    pk = std::move(next);
  }
  for (int i = 0; i < n; ++i) {
    if (targets.count(i)) continue;
    Rat d = h.exact[static_cast<size_t>(i)] - best[static_cast<size_t>(i)];
    if (d < 0) d = -d;
    if (d > report.max_deviation) report.max_deviation = d;
  }
  return report;
}

// Partition under which hitting probabilities into every class are uniform
// within each block: the kernel of the class-hitting signature, iterated to a
// fixed point starting from singleton probes. (Starting from the trivial
// partition is degenerate: hitting the whole space is 1 everywhere, so the
// one-class signature never splits anything.)
inline Partition coarsest_lumping(const MarkovChain& c, bool exact = true,
                                  double tol = 1e-9) {
  const int n = c.size();
  Partition part = Partition::discrete(n);
  for (int round = 0; round <= 2 * n + 2; ++round) {
    auto classes = part.blocks();
    std::vector<std::string> keys(static_cast<size_t>(n));
    for (const auto& cls : classes) {
      std::set<int> targets(cls.begin(), cls.end());
      auto h = hitting(c, targets,
                       exact ? HittingMethod::Exact : HittingMethod::ValueIteration,
                       exact ? 1e-12 : tol / 8);
      if (exact) {
        for (int i = 0; i < n; ++i)
          keys[static_cast<size_t>(i)] += format_rat(h.exact[static_cast<size_t>(i)]) + ";";
      } else {
        // bucket by tol: sort values, split where gaps exceed tol
        std::vector<int> order(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          return h.value[static_cast<size_t>(a)] < h.value[static_cast<size_t>(b)];
        });
        std::vector<int> bucket(static_cast<size_t>(n), 0);
        int cur = 0;
        for (size_t k = 1; k < order.size(); ++k) {
          if (h.value[static_cast<size_t>(order[k])] -
                  h.value[static_cast<size_t>(order[k - 1])] >
              tol)
            ++cur;
          bucket[static_cast<size_t>(order[k])] = cur;
        }
        for (int i = 0; i < n; ++i)
          keys[static_cast<size_t>(i)] += std::to_string(bucket[static_cast<size_t>(i)]) + ";";
      }
    }
    // kernel of the signature: merges and splits both happen here
    Partition next = Partition::from_keys(keys);
    if (next == part) break;
    part = next;
  }
  return part;
}

// The merge-maximality certificate: every pair of states from distinct blocks
// disagrees on the hitting probability into some class of `part`.
inline bool lumping_merge_fails(const MarkovChain& c, const Partition& part, int block_a,
                                int block_b, bool exact = true, double tol = 1e-9) {
  auto classes = part.blocks();
  for (const auto& cls : classes) {
    std::set<int> targets(cls.begin(), cls.end());
    auto h = hitting(c, targets,
                     exact ? HittingMethod::Exact : HittingMethod::ValueIteration,
                     exact ? 1e-12 : tol / 8);
    for (int i : classes[static_cast<size_t>(block_a)])
      for (int j : classes[static_cast<size_t>(block_b)]) {
        if (exact) {
          if (h.exact[static_cast<size_t>(i)] != h.exact[static_cast<size_t>(j)])
            return true;
        } else if (std::abs(h.value[static_cast<size_t>(i)] -
                            h.value[static_cast<size_t>(j)]) > tol) {
          return true;
        }
      }
  }
  return false;
}

// Does the partition satisfy the lumping condition (equal class-hitting
// probabilities within every block)?
inline bool check_lumping(const MarkovChain& c, const Partition& part, bool exact = true,
                          double tol = 1e-9) {
  auto classes = part.blocks();
  for (const auto& cls : classes) {
    std::set<int> targets(cls.begin(), cls.end());
    auto h = hitting(c, targets,
                     exact ? HittingMethod::Exact : HittingMethod::ValueIteration,
                     exact ? 1e-12 : tol / 8);
    for (const auto& blk : classes)
      for (size_t k = 1; k < blk.size(); ++k) {
        if (exact) {
          if (h.exact[static_cast<size_t>(blk[k])] != h.exact[static_cast<size_t>(blk[0])])
            return false;
        } else if (std::abs(h.value[static_cast<size_t>(blk[k])] -
                            h.value[static_cast<size_t>(blk[0])]) > tol) {
          return false;
        }
      }
  }
  return true;
}

// Kleene chain of x -> (f# v x o P) truncated at n_max, with f the quotient
// map of `part`: entrywise max of the class indicator and the one-step
// extension. Converges to the class-summed hitting values.
inline std::vector<std::vector<double>> kleene_hitting(const MarkovChain& c,
                                                       const Partition& part, int n_max) {
  const int n = c.size();
  const int m = part.n_blocks;
  std::vector<std::vector<double>> x(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(m), 0.0));
  for (int step = 0; step < n_max; ++step) {
    std::vector<std::vector<double>> next = x;
    for (int i = 0; i < n; ++i) {
      for (int b = 0; b < m; ++b) {
        double one_step = 0.0;
        for (int j = 0; j < n; ++j)
          one_step += rat_to_double(c.P[static_cast<size_t>(i)][static_cast<size_t>(j)]) *
                      x[static_cast<size_t>(j)][static_cast<size_t>(b)];
        double fs = part.block[static_cast<size_t>(i)] == b ? 1.0 : 0.0;
        next[static_cast<size_t>(i)][static_cast<size_t>(b)] = std::max(fs, one_step);
      }
    }
    x = std::move(next);
  }
  return x;
}

}  // namespace timedeq
