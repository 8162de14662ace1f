#pragma once

// General saturation: the four canonical monoid homomorphisms get fast paths,
// finite monoids get the direct iterated-join construction.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "timedeq/systems.hpp"

namespace timedeq {

enum class CanonicalHom { StrongTimed, WeakTimed, StrongAbstract, WeakAbstract };

inline std::string hom_name(CanonicalHom h) {
  switch (h) {
    case CanonicalHom::StrongTimed: return "id";
    case CanonicalHom::WeakTimed: return "weak";
    case CanonicalHom::StrongAbstract: return "abstract";
    case CanonicalHom::WeakAbstract: return "weak-abstract";
  }
  return "?";
}

inline CanonicalHom hom_by_key(const std::string& key) {
  if (key == "id" || key == "strong-timed") return CanonicalHom::StrongTimed;
  if (key == "weak" || key == "weak-timed") return CanonicalHom::WeakTimed;
  if (key == "abstract" || key == "strong-abstract") return CanonicalHom::StrongAbstract;
  if (key == "weak-abstract") return CanonicalHom::WeakAbstract;
  throw ValidationError("unknown hom '" + key + "'");
}

struct SaturationBounds {
  int64_t t_max = -1;  // < 0: 2 * max duration * |states|, at least max duration
  int depth = -1;      // < 0: |states|
  Rat tolerance{0};

  int64_t resolve_t_max(const TimedSystem& sys) const {
    if (t_max >= 0) return t_max;
    return std::max<int64_t>(sys.max_duration(),
                             2 * sys.max_duration() * sys.n_states());
  }
  int resolve_depth(const TimedSystem& sys) const {
    return depth >= 0 ? depth : sys.n_states();
  }
};

// A target-monoid-indexed family of endomorphisms. Members carry the accept
// columns produced by the composite formulas; weak-timed families over matrix
// backends additionally record the rule-based saturated accept (tau-closure
// then a raw accepting move, durations summed exactly).
struct SaturatedFamily {
  TimedSystem source;
  CanonicalHom hom = CanonicalHom::StrongTimed;
  MonoidSpec target;
  std::vector<MonoidElem> index;
  std::vector<EffectEndo> member;
  std::vector<std::vector<Scalar>> rule_accept;  // parallel to index when present
  SaturationBounds bounds;
  bool exact = true;

  int find(const MonoidElem& e) const {
    for (size_t i = 0; i < index.size(); ++i)
      if (target.eq(index[i], e)) return static_cast<int>(i);
    return -1;
  }
  const EffectEndo& member_at_nat(int64_t n) const {
    MonoidElem e;
    e.nat = n;
    int i = find(e);
    if (i < 0) throw ValidationError("index " + std::to_string(n) + " not materialized");
    return member[static_cast<size_t>(i)];
  }
  bool has_rule_accept() const { return !rule_accept.empty(); }
};

namespace detail {

inline EffectEndo join_all_steps(const TimedSystem& sys) {
  EffectEndo u = EffectEndo::bottom(sys.backend, sys.base, sys.n_states(), sys.n_labels());
  for (int64_t t : sys.durations) u = join(u, sys.step.at(t));
  return u;
}

// Saturated tau-closure of the duration-zero stage.
inline EffectEndo zero_closure(const TimedSystem& sys, int depth, const Rat& tol,
                               bool& exact) {
  EffectEndo z0 = sys.step_at(0);
  if (sys.backend != Backend::Convex) return endo_star(z0);
  auto r = bounded_star(z0, depth, tol);
  exact = exact && r.converged;
  return r.endo;
}

}  // namespace detail

inline SaturatedFamily saturate(const TimedSystem& sys, CanonicalHom hom,
                                SaturationBounds bounds = {}) {
  SaturatedFamily fam;
  fam.source = sys;
  fam.hom = hom;
  fam.bounds = bounds;
  const int64_t t_max = bounds.resolve_t_max(sys);
  const int depth = bounds.resolve_depth(sys);
  fam.bounds.t_max = t_max;
  fam.bounds.depth = depth;
  const int n = sys.n_states();
  const int nl = sys.n_labels();

  switch (hom) {
    case CanonicalHom::StrongTimed: {
      fam.target = MonoidSpec::free_words(sys.durations);
      fam.index.push_back(MonoidElem{});  // empty word
      fam.member.push_back(EffectEndo::identity(sys.backend, sys.base, n, nl));
      for (int64_t t : sys.durations) {
        MonoidElem e;
        e.word = {t};
        fam.index.push_back(std::move(e));
        fam.member.push_back(sys.step.at(t));
      }
      break;
    }

    case CanonicalHom::StrongAbstract: {
      fam.target = MonoidSpec::star_words();
      EffectEndo u = detail::join_all_steps(sys);
      EffectEndo pow = EffectEndo::identity(sys.backend, sys.base, n, nl);
      for (int k = 0; k <= depth; ++k) {
        MonoidElem e;
        e.word.assign(static_cast<size_t>(k), 0);
        fam.index.push_back(std::move(e));
        fam.member.push_back(pow);
        if (k < depth) pow = compose(pow, u);
      }
      break;
    }

    case CanonicalHom::WeakTimed: {
      fam.target = MonoidSpec::nat_add(t_max);
      EffectEndo z = detail::zero_closure(sys, depth, bounds.tolerance, fam.exact);
      if (sys.backend != Backend::Convex) {
        // member(0) = Z, member(t) = \/_{0<u<=t} Z o pi_u o member(t-u)
        std::vector<EffectEndo> members;
        members.push_back(z);
        for (int64_t t = 1; t <= t_max; ++t) {
          EffectEndo acc = EffectEndo::bottom(sys.backend, sys.base, n, nl);
          for (int64_t u : sys.durations) {
            if (u == 0 || u > t) continue;
            acc = join(acc, compose(z, compose(sys.step.at(u),
                                               members[static_cast<size_t>(t - u)])));
          }
          members.push_back(std::move(acc));
        }
        for (int64_t t = 0; t <= t_max; ++t) {
          MonoidElem e;
          e.nat = t;
          fam.index.push_back(std::move(e));
          fam.member.push_back(members[static_cast<size_t>(t)]);
        }
      } else {
        // step-indexed weak combined stages: W_0(t) = [t = 0] id,
        // W_{n+1}(t) = \/_{t' in D, t' <= t} guarded(pi_{t'}, W_n(t - t'))
        std::vector<EffectEndo> sum;
        std::vector<EffectEndo> w;
        for (int64_t t = 0; t <= t_max; ++t) {
          EffectEndo base = t == 0 ? EffectEndo::identity(sys.backend, sys.base, n, nl)
                                   : EffectEndo::bottom(sys.backend, sys.base, n, nl);
          sum.push_back(base);
          w.push_back(std::move(base));
        }
        bool stabilized = false;
        for (int level = 1; level <= depth && !stabilized; ++level) {
          std::vector<EffectEndo> next;
          for (int64_t t = 0; t <= t_max; ++t) {
            EffectEndo acc = EffectEndo::bottom(sys.backend, sys.base, n, nl);
            for (int64_t u : sys.durations) {
              if (u > t) continue;
              acc = join(acc, compose_weak_stage(sys.step.at(u),
                                                 w[static_cast<size_t>(t - u)]));
            }
            next.push_back(std::move(acc));
          }
          stabilized = next == w;  // stage tables repeat, nothing new can appear
          for (int64_t t = 0; t <= t_max; ++t)
            sum[static_cast<size_t>(t)] =
                join(sum[static_cast<size_t>(t)], next[static_cast<size_t>(t)]);
          w = std::move(next);
        }
        fam.exact = fam.exact && stabilized;
        for (int64_t t = 0; t <= t_max; ++t) {
          MonoidElem e;
          e.nat = t;
          fam.index.push_back(std::move(e));
          fam.member.push_back(sum[static_cast<size_t>(t)]);
        }
      }
      // rule-based saturated accept for the language layer
      if (sys.has_accept && sys.backend != Backend::Convex) {
        for (int64_t t = 0; t <= t_max; ++t) {
          std::vector<Scalar> col(static_cast<size_t>(n), sys.base.bottom());
          for (int64_t u : sys.durations) {
            if (u > t) continue;
            const EffectEndo& reach = fam.member[static_cast<size_t>(t - u)];
            const EffectEndo& raw = sys.step.at(u);
            for (int x = 0; x < n; ++x)
              for (int y = 0; y < n; ++y)
                col[static_cast<size_t>(x)] =
                    sys.base.join(col[static_cast<size_t>(x)],
                                  sys.base.mult(reach.at(x, y).w[0], raw.acc[y]));
          }
          fam.rule_accept.push_back(std::move(col));
        }
      }
      break;
    }

    case CanonicalHom::WeakAbstract: {
      fam.target = MonoidSpec::trivial();
      EffectEndo u = detail::join_all_steps(sys);
      EffectEndo w;
      if (sys.backend != Backend::Convex) {
        w = endo_star(u);
      } else {
        auto r = bounded_star(u, depth, bounds.tolerance);
        fam.exact = r.converged;
        w = std::move(r.endo);
      }
      fam.index.push_back(MonoidElem{});
      fam.member.push_back(std::move(w));
      break;
    }
  }
  return fam;
}

inline SaturatedFamily saturate(const TimedSystem& sys, const std::string& hom_key,
                                SaturationBounds bounds = {}) {
  return saturate(sys, hom_by_key(hom_key), bounds);
}

// ---------------------------------------------------------------------------
// Lax-functor law check.
// ---------------------------------------------------------------------------

struct LaxLawReport {
  struct Entry {
    std::string law;
    bool pass = true;
    bool skipped = false;
  };
  std::vector<Entry> entries;
  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const Entry& e) { return e.pass || e.skipped; });
  }
};

inline LaxLawReport check_lax_laws(const SaturatedFamily& fam) {
  LaxLawReport report;
  const bool convex = fam.source.backend == Backend::Convex;
  int unit_idx = fam.find(fam.target.unit());
  if (unit_idx >= 0) {
    LaxLawReport::Entry e;
    e.law = "id <= member(" + fam.target.format(fam.target.unit()) + ")";
    EffectEndo id = EffectEndo::identity(fam.source.backend, fam.source.base,
                                         fam.source.n_states(), fam.source.n_labels());
    e.pass = leq(id, fam.member[static_cast<size_t>(unit_idx)]);
    report.entries.push_back(std::move(e));
  }
  for (size_t i = 0; i < fam.index.size(); ++i) {
    for (size_t j = 0; j < fam.index.size(); ++j) {
      MonoidElem prod = fam.target.op(fam.index[i], fam.index[j]);
      int k = fam.find(prod);
      if (k < 0) continue;
      LaxLawReport::Entry e;
      e.law = "member(" + fam.target.format(fam.index[i]) + ") o member(" +
              fam.target.format(fam.index[j]) + ") <= member(" + fam.target.format(prod) +
              ")";
      if (convex && !fam.exact) {
        e.skipped = true;  // bounded stage counts make the composite exceed the budget
      } else {
        EffectEndo comp = convex ? compose_weak_stage(fam.member[i], fam.member[j])
                                 : compose(fam.member[i], fam.member[j]);
        e.pass = leq(comp, fam.member[static_cast<size_t>(k)]);
      }
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Idempotency: pull the family back along its hom, read it as a system, and
// saturate again.
// ---------------------------------------------------------------------------

inline SaturatedFamily pullback_resaturate(const SaturatedFamily& fam) {
  if (!fam.exact) throw UnsupportedExact("pullback_resaturate needs an exact family");
  const TimedSystem& src = fam.source;
  TimedSystem synth;
  synth.backend = src.backend;
  synth.base = src.base;
  synth.quantale_key = src.quantale_key;
  synth.states = src.states;
  synth.alphabet = src.alphabet;
  synth.has_accept = src.has_accept;

  SaturationBounds bounds = fam.bounds;
  switch (fam.hom) {
    case CanonicalHom::StrongTimed:
      return saturate(src, CanonicalHom::StrongTimed, bounds);
    case CanonicalHom::WeakTimed: {
      for (int64_t t = 0; t <= fam.bounds.t_max; ++t) {
        synth.durations.push_back(t);
        synth.step.emplace(t, fam.member_at_nat(t));
      }
      return saturate(synth, CanonicalHom::WeakTimed, bounds);
    }
    case CanonicalHom::StrongAbstract: {
      // pi'_d = member(1) for every letter d
      const EffectEndo& u = fam.member[1];
      for (int64_t d : src.durations) {
        synth.durations.push_back(d);
        synth.step.emplace(d, u);
      }
      if (synth.durations.empty()) {
        synth.durations.push_back(0);
        synth.step.emplace(0, u);
      }
      return saturate(synth, CanonicalHom::StrongAbstract, bounds);
    }
    case CanonicalHom::WeakAbstract: {
      synth.durations.push_back(0);
      synth.step.emplace(0, fam.member[0]);
      return saturate(synth, CanonicalHom::WeakAbstract, bounds);
    }
  }
  throw ValidationError("unreachable");
}

// ---------------------------------------------------------------------------
// General finite-monoid saturation: the direct iterated construction
//   Pi_{n,0}   = \/ { pi_m | q(m) = n }
//   Pi_{n,i+1} = \/ { Pi_{n1,i} o ... o Pi_{nl,i} | n1...nl = n }
// for a surjective hom q between finite monoids.
// ---------------------------------------------------------------------------

struct EndoFamily {
  MonoidSpec monoid;  // finite table
  std::vector<EffectEndo> member;  // indexed by element order
};

struct GeneralSaturation {
  MonoidSpec target;
  std::vector<EffectEndo> member;  // indexed by target element order
  bool exact = true;
  int levels_used = 0;
};

inline GeneralSaturation saturate_family(const EndoFamily& fam, const MonoidHom& q,
                                         int max_iterations = 64) {
  if (fam.monoid.kind != MonoidSpec::Kind::Table || q.kind != MonoidHom::Kind::Table)
    throw UnsupportedHom("the general construction needs finite-table monoids");
  if (!q.source.same_as(fam.monoid))
    throw ValidationError("hom source does not match the family monoid");
  const int nm = static_cast<int>(fam.monoid.elem_names.size());
  const int nn = static_cast<int>(q.target.elem_names.size());
  if (static_cast<int>(fam.member.size()) != nm)
    throw ValidationError("family must assign an endomorphism to every element");
  const EffectEndo& probe = fam.member[0];

  GeneralSaturation out;
  out.target = q.target;
  std::vector<EffectEndo> level(static_cast<size_t>(nn),
                                EffectEndo::bottom(probe.backend, probe.base, probe.dim,
                                                   probe.n_labels));
  for (int m = 0; m < nm; ++m)
    level[static_cast<size_t>(q.map[m])] =
        join(level[static_cast<size_t>(q.map[m])], fam.member[static_cast<size_t>(m)]);

  out.exact = false;
  out.levels_used = max_iterations;
  for (int iter = 0; iter < max_iterations; ++iter) {
    // close the current level under all decompositions n1 . n2 = n
    std::vector<EffectEndo> closed = level;
    bool inner_exact = false;
    for (int pass = 0; pass < max_iterations; ++pass) {
      std::vector<EffectEndo> next = level;
      for (int a = 0; a < nn; ++a)
        for (int b = 0; b < nn; ++b) {
          int c = q.target.table[a][b];
          next[static_cast<size_t>(c)] =
              join(next[static_cast<size_t>(c)],
                   compose(level[static_cast<size_t>(a)], closed[static_cast<size_t>(b)]));
        }
      if (next == closed) {
        inner_exact = true;
        break;
      }
      closed = std::move(next);
    }
    if (closed == level) {
      out.exact = inner_exact;
      out.levels_used = iter;
      break;
    }
    level = std::move(closed);
  }
  out.member = std::move(level);
  return out;
}

}  // namespace timedeq
