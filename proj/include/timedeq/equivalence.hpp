#pragma once

// Behavioural-equivalence checkers: partition refinement over saturated
// families, language samples and exact language comparison, and the spectrum
// assembly with its refinement-order verification.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "timedeq/partition.hpp"
#include "timedeq/saturation.hpp"
#include "timedeq/words.hpp"

namespace timedeq {

// ---------------------------------------------------------------------------
// Signatures and partition refinement.
// ---------------------------------------------------------------------------

namespace detail {

// Deterministic signature of one state relative to a partition: per index and
// label the joined weight into every block, the member accept cell, and the
// rule-based weak accept when the family carries one.
inline std::vector<std::string> signatures(const SaturatedFamily& fam,
                                           const Partition& part) {
  const TimedSystem& sys = fam.source;
  const ScalarQuantale& q = sys.base;
  const int n = sys.n_states();
  std::vector<std::string> keys(static_cast<size_t>(n));
  for (size_t mi = 0; mi < fam.member.size(); ++mi) {
    const EffectEndo& m = fam.member[mi];
    if (m.is_matrix()) {
      for (int x = 0; x < n; ++x) {
        std::string& key = keys[static_cast<size_t>(x)];
        for (int l = 0; l <= sys.n_labels(); ++l) {
          std::vector<Scalar> per_block(static_cast<size_t>(part.n_blocks), q.bottom());
          for (int y = 0; y < n; ++y) {
            int b = part.block[static_cast<size_t>(y)];
            per_block[static_cast<size_t>(b)] =
                q.join(per_block[static_cast<size_t>(b)], m.at(x, y).w[l]);
          }
          for (const Scalar& s : per_block) key += q.format(s) + ",";
        }
        key += "#" + q.format(m.acc[x]);
        if (fam.has_rule_accept())
          key += "~" + q.format(fam.rule_accept[mi][static_cast<size_t>(x)]);
        key += "|";
      }
    } else {
      for (int x = 0; x < n; ++x) {
        std::string& key = keys[static_cast<size_t>(x)];
        std::vector<DistGenerator> projected;
        for (const DistGenerator& g : m.gens[static_cast<size_t>(x)]) {
          DistGenerator p;
          p.accept = g.accept;
          for (const auto& [l, y, w] : g.mass)
            p.add(l, part.block[static_cast<size_t>(y)], w);
          p.normalize();
          projected.push_back(std::move(p));
        }
        if (!projected.empty()) projected = canonicalize_convex(std::move(projected));
        key += "[";
        for (const auto& g : projected) {
          for (const auto& [l, b, w] : g.mass)
            key += std::to_string(l) + ":" + std::to_string(b) + "=" + format_rat(w) + " ";
          key += "acc=" + format_rat(g.accept) + ";";
        }
        key += "]|";
      }
    }
  }
  return keys;
}

}  // namespace detail

struct BisimResult {
  Partition partition;
  bool exact = true;  // false when the family itself was bounded
};

// Coarsest partition whose blocks have uniform signatures over all
// materialized indices, by iterated refinement from the trivial partition.
inline BisimResult coarsest_bisimulation(const SaturatedFamily& fam) {
  const int n = fam.source.n_states();
  Partition part = Partition::trivial(n);
  for (int round = 0; round <= n + 1; ++round) {
    Partition next = part.refine_by(detail::signatures(fam, part));
    if (next == part) break;
    part = next;
  }
  return {part, fam.exact};
}

// Do all blocks of R have uniform signatures?
inline bool check_bisimulation(const SaturatedFamily& fam, const Partition& R) {
  auto keys = detail::signatures(fam, R);
  for (size_t x = 0; x < keys.size(); ++x)
    for (size_t y = x + 1; y < keys.size(); ++y)
      if (R.block[x] == R.block[y] && keys[x] != keys[y]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Languages.
// ---------------------------------------------------------------------------

struct LanguageSample {
  LangMode mode = LangMode::TL;
  LangBound bound;
  bool exact = true;
  std::map<TimedWord, Scalar> words;       // matrix backends
  std::vector<TimedWord> word_universe;    // convex: coordinate space
  std::vector<DistGenerator> convex;       // convex: canonical generators
};

namespace detail {

// One saturated-step source shared by the language walkers: stage
// endomorphisms per duration plus the accept column per duration.
struct StepSource {
  std::vector<int64_t> durations;
  std::map<int64_t, const EffectEndo*> stage;
  std::map<int64_t, std::vector<Scalar>> accept;
  bool exact = true;
};

// For the time-abstract modes the single stage is the duration-joined step
// (or the weak-abstract closure), held by the caller in `abstract_stage`:
// words then consume letters only, never the time budget, which keeps the
// bounded sample a genuine truncation of the time-abstract language.
inline StepSource language_steps(const TimedSystem& sys, const SaturatedFamily* weak,
                                 const EffectEndo* abstract_stage,
                                 const std::vector<Scalar>* abstract_accept,
                                 LangMode mode) {
  StepSource src;
  if (mode == LangMode::UTL || mode == LangMode::WUTL) {
    src.durations.push_back(0);
    src.stage.emplace(0, abstract_stage);
    src.accept.emplace(0, *abstract_accept);
    return src;
  }
  if (mode == LangMode::TL) {
    for (int64_t t : sys.durations) {
      const EffectEndo& e = sys.step.at(t);
      src.durations.push_back(t);
      src.stage.emplace(t, &e);
      src.accept.emplace(t, e.acc);
    }
    return src;
  }
  for (size_t i = 0; i < weak->index.size(); ++i) {
    int64_t t = weak->index[i].nat;
    src.durations.push_back(t);
    src.stage.emplace(t, &weak->member[i]);
    if (weak->has_rule_accept()) src.accept.emplace(t, weak->rule_accept[i]);
  }
  src.exact = weak->exact;
  return src;
}

inline std::vector<Scalar> advance(const ScalarQuantale& q, const EffectEndo& e,
                                   const std::vector<Scalar>& vec, int label) {
  std::vector<Scalar> out(vec.size(), q.bottom());
  for (int x = 0; x < e.dim; ++x) {
    if (vec[static_cast<size_t>(x)].is_bot()) continue;
    for (int y = 0; y < e.dim; ++y)
      out[static_cast<size_t>(y)] =
          q.join(out[static_cast<size_t>(y)],
                 q.mult(vec[static_cast<size_t>(x)], e.at(x, y).w[label]));
  }
  return out;
}

inline void enumerate_matrix_words(const TimedSystem& sys, const StepSource& src,
                                   const std::vector<Scalar>& vec, TimedWord word,
                                   const LangBound& bound,
                                   std::map<TimedWord, Scalar>& out) {
  const ScalarQuantale& q = sys.base;
  int64_t used = word.total_time();
  for (const auto& [t, acc] : src.accept) {
    if (used + t > bound.max_time) continue;
    Scalar w = q.bottom();
    for (size_t y = 0; y < vec.size(); ++y) w = q.join(w, q.mult(vec[y], acc[y]));
    if (w.is_bot()) continue;
    TimedWord done = word;
    done.durations.push_back(t);
    auto [it, fresh] = out.emplace(std::move(done), w);
    if (!fresh) it->second = q.join(it->second, w);
  }
  if (static_cast<int>(word.labels.size()) >= bound.max_len) return;
  for (int64_t t : src.durations) {
    if (used + t > bound.max_time) continue;
    const EffectEndo& stage = *src.stage.at(t);
    for (int l = 0; l <= sys.n_labels(); ++l) {
      auto next = advance(q, stage, vec, l);
      bool alive = false;
      for (const auto& s : next)
        if (!s.is_bot()) alive = true;
      if (!alive) continue;
      TimedWord w2 = word;
      w2.durations.push_back(t);
      w2.labels.push_back(l);
      enumerate_matrix_words(sys, src, next, std::move(w2), bound, out);
    }
  }
}

// Convex language recursion: canonical generators of the set of word
// sub-distributions reachable from `state` within the bound. The zero
// distribution (the empty formal sum, vacuously accepted) is always included;
// a branch that cannot be resolved within the bound contributes no word mass.
struct ConvexLangWalker {
  const TimedSystem& sys;
  const StepSource& src;
  std::map<TimedWord, int>& word_ids;
  std::vector<TimedWord> by_id;
  std::map<std::tuple<int, int, int64_t>, std::vector<DistGenerator>> memo;

  int word_id(const TimedWord& w) {
    auto [it, fresh] = word_ids.emplace(w, static_cast<int>(word_ids.size()));
    if (fresh) by_id.push_back(w);
    return it->second;
  }

  // Generators over coordinates (0, word_id).
  std::vector<DistGenerator> run(int state, int len, int64_t time) {
    auto key = std::make_tuple(state, len, time);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;
    std::vector<DistGenerator> out;
    out.push_back(DistGenerator{});  // the zero word-distribution
    const std::vector<DistGenerator> give_up = {DistGenerator{}};
    for (int64_t t : src.durations) {
      if (t > time) continue;
      const EffectEndo& stage = *src.stage.at(t);
      for (const DistGenerator& phi : stage.gens[static_cast<size_t>(state)]) {
        std::vector<std::vector<DistGenerator>> conts;
        for (const auto& [l, y, w] : phi.mass) {
          std::vector<DistGenerator> cont =
              len > 0 ? run(y, len - 1, time - t) : give_up;
          if (cont.empty()) cont = give_up;
          conts.push_back(std::move(cont));
        }
        std::vector<size_t> choice(phi.mass.size(), 0);
        while (true) {
          DistGenerator delta;
          if (phi.accept != 0) {
            TimedWord acc_word;
            acc_word.durations = {t};
            delta.add(0, word_id(acc_word), phi.accept);
          }
          for (size_t bi = 0; bi < phi.mass.size(); ++bi) {
            const auto& [l, y, w] = phi.mass[bi];
            const DistGenerator& psi = conts[bi][choice[bi]];
            for (const auto& [zero, wid, ww] : psi.mass) {
              TimedWord rest = by_id[static_cast<size_t>(wid)];  // copy: by_id grows below
              TimedWord full;
              full.durations.push_back(t);
              full.durations.insert(full.durations.end(), rest.durations.begin(),
                                    rest.durations.end());
              full.labels.push_back(l);
              full.labels.insert(full.labels.end(), rest.labels.begin(),
                                 rest.labels.end());
              delta.add(0, word_id(full), w * ww);
            }
          }
          delta.normalize();
          out.push_back(std::move(delta));
          size_t k = 0;
          while (k < choice.size()) {
            if (++choice[k] < conts[k].size()) break;
            choice[k] = 0;
            ++k;
          }
          if (k >= choice.size()) break;
        }
      }
    }
    out = canonicalize_convex(std::move(out));
    memo.emplace(key, out);
    return out;
  }
};

}  // namespace detail

inline LanguageSample languages(const TimedSystem& sys, int state, LangMode mode,
                                LangBound bound) {
  if (!sys.has_accept) throw NoAcceptance("system has no accepting data");
  LanguageSample sample;
  sample.mode = mode;
  sample.bound = bound;

  std::optional<SaturatedFamily> weak;
  std::optional<EffectEndo> abstract_stage;
  std::vector<Scalar> abstract_accept;
  if (mode == LangMode::WTL) {
    weak = saturate(sys, CanonicalHom::WeakTimed, {.t_max = bound.max_time});
    sample.exact = weak->exact;
  } else if (mode == LangMode::UTL) {
    EffectEndo u = detail::join_all_steps(sys);
    abstract_accept = u.acc;
    abstract_stage = std::move(u);
  } else if (mode == LangMode::WUTL) {
    auto fam = saturate(sys, CanonicalHom::WeakAbstract,
                        {.depth = 2 * sys.n_states() + 2});
    sample.exact = fam.exact;
    abstract_accept = fam.member[0].acc;
    abstract_stage = std::move(fam.member[0]);
  }
  auto src = detail::language_steps(sys, weak ? &*weak : nullptr,
                                    abstract_stage ? &*abstract_stage : nullptr,
                                    &abstract_accept, mode);

  if (sys.backend != Backend::Convex) {
    std::vector<Scalar> vec(static_cast<size_t>(sys.n_states()), sys.base.bottom());
    vec[static_cast<size_t>(state)] = sys.base.one();
    std::map<TimedWord, Scalar> timed;
    detail::enumerate_matrix_words(sys, src, vec, {}, bound, timed);
    if (mode == LangMode::TL || mode == LangMode::WTL) {
      sample.words = std::move(timed);
    } else {
      for (const auto& [w, weight] : timed) {
        TimedWord u;
        u.labels = w.labels;
        auto [it, fresh] = sample.words.emplace(std::move(u), weight);
        if (!fresh) it->second = sys.base.join(it->second, weight);
      }
    }
    return sample;
  }

  std::map<TimedWord, int> ids;
  detail::ConvexLangWalker walker{sys, src, ids, {}, {}};
  auto gens = walker.run(state, bound.max_len, bound.max_time);
  if (mode == LangMode::UTL || mode == LangMode::WUTL) {
    // project every coordinate onto its untimed word
    std::map<TimedWord, int> untimed_ids;
    std::vector<DistGenerator> projected;
    std::vector<TimedWord> by_id(ids.size());
    for (const auto& [w, id] : ids) by_id[static_cast<size_t>(id)] = w;
    for (const auto& g : gens) {
      DistGenerator p;
      p.accept = g.accept;
      for (const auto& [zero, wid, w] : g.mass) {
        TimedWord u;
        u.labels = by_id[static_cast<size_t>(wid)].labels;
        auto [it, fresh] = untimed_ids.emplace(u, static_cast<int>(untimed_ids.size()));
        p.add(0, it->second, w);
      }
      p.normalize();
      projected.push_back(std::move(p));
    }
    if (!projected.empty()) projected = canonicalize_convex(std::move(projected));
    sample.convex = std::move(projected);
    sample.word_universe.resize(untimed_ids.size());
    for (const auto& [w, id] : untimed_ids)
      sample.word_universe[static_cast<size_t>(id)] = w;
    return sample;
  }
  sample.convex = std::move(gens);
  sample.word_universe.resize(ids.size());
  for (const auto& [w, id] : ids) sample.word_universe[static_cast<size_t>(id)] = w;
  return sample;
}

// ---------------------------------------------------------------------------
// Exact comparison by determinization (nondet backend).
// ---------------------------------------------------------------------------

namespace detail {

struct Letter {
  int label = 0;
  int64_t t = 0;
  bool end = false;  // accepting move marker
  friend bool operator<(const Letter& a, const Letter& b) {
    return std::tie(a.end, a.t, a.label) < std::tie(b.end, b.t, b.label);
  }
};

struct WordNfa {
  int n = 0;  // real states; state n is the accepting sink
  std::vector<Letter> letters;
  std::map<Letter, std::vector<std::vector<int>>> next;  // letter -> per-state targets

  static WordNfa build(const StepSource& src, int n_states, int n_labels, bool timed) {
    WordNfa nfa;
    nfa.n = n_states;
    std::set<Letter> alphabet;
    for (int64_t t : src.durations) {
      const EffectEndo& stage = *src.stage.at(t);
      for (int l = 0; l <= n_labels; ++l)
        for (int x = 0; x < n_states; ++x)
          for (int y = 0; y < n_states; ++y)
            if (!stage.at(x, y).w[l].is_bot())
              alphabet.insert({l, timed ? t : 0, false});
    }
    for (const auto& [t, acc] : src.accept)
      for (const auto& a : acc)
        if (!a.is_bot()) alphabet.insert({0, timed ? t : 0, true});
    nfa.letters.assign(alphabet.begin(), alphabet.end());
    for (const Letter& letter : nfa.letters) {
      std::vector<std::vector<int>> adj(static_cast<size_t>(n_states + 1));
      if (letter.end) {
        for (const auto& [t, acc] : src.accept) {
          if (timed && t != letter.t) continue;
          for (int x = 0; x < n_states; ++x)
            if (!acc[static_cast<size_t>(x)].is_bot()) {
              auto& row = adj[static_cast<size_t>(x)];
              if (row.empty()) row.push_back(n_states);
            }
        }
      } else {
        for (int64_t t : src.durations) {
          if (timed && t != letter.t) continue;
          const EffectEndo& stage = *src.stage.at(t);
          for (int x = 0; x < n_states; ++x)
            for (int y = 0; y < n_states; ++y)
              if (!stage.at(x, y).w[letter.label].is_bot()) {
                auto& row = adj[static_cast<size_t>(x)];
                if (std::find(row.begin(), row.end(), y) == row.end()) row.push_back(y);
              }
        }
      }
      nfa.next.emplace(letter, std::move(adj));
    }
    return nfa;
  }

  std::set<int> step(const std::set<int>& from, const Letter& letter) const {
    std::set<int> out;
    const auto& adj = next.at(letter);
    for (int x : from) {
      if (x > n) continue;
      for (int y : adj[static_cast<size_t>(x)]) out.insert(y);
    }
    return out;
  }

  static bool accepting(const std::set<int>& s, int n) { return s.count(n) > 0; }
};

struct NfaVerdict {
  bool equal = true;
  std::optional<TimedWord> witness;
};

inline NfaVerdict nfa_language_equal(const WordNfa& nfa, int x, int y, bool timed) {
  struct Node {
    std::set<int> a, b;
  };
  std::map<std::pair<std::set<int>, std::set<int>>, int> seen;
  std::vector<std::pair<int, Letter>> parent;  // node -> (prev node, letter)
  std::deque<int> queue;
  std::vector<Node> nodes;
  auto push = [&](std::set<int> a, std::set<int> b, int prev, Letter via) -> int {
    auto key = std::make_pair(a, b);
    auto it = seen.find(key);
    if (it != seen.end()) return -1;
    int id = static_cast<int>(nodes.size());
    seen.emplace(std::move(key), id);
    nodes.push_back({std::move(a), std::move(b)});
    parent.emplace_back(prev, via);
    queue.push_back(id);
    return id;
  };
  push({x}, {y}, -1, {});
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    const Node node = nodes[static_cast<size_t>(id)];
    if (WordNfa::accepting(node.a, nfa.n) != WordNfa::accepting(node.b, nfa.n)) {
      // reconstruct the distinguishing word
      std::vector<Letter> path;
      for (int cur = id; cur > 0; cur = parent[static_cast<size_t>(cur)].first)
        path.push_back(parent[static_cast<size_t>(cur)].second);
      std::reverse(path.begin(), path.end());
      TimedWord w;
      for (const Letter& l : path) {
        if (l.end) {
          if (timed) w.durations.push_back(l.t);
        } else {
          if (timed) w.durations.push_back(l.t);
          w.labels.push_back(l.label);
        }
      }
      NfaVerdict v;
      v.equal = false;
      v.witness = std::move(w);
      return v;
    }
    for (const Letter& letter : nfa.letters) {
      auto a2 = nfa.step(node.a, letter);
      auto b2 = nfa.step(node.b, letter);
      if (a2.empty() && b2.empty()) continue;
      push(std::move(a2), std::move(b2), id, letter);
    }
  }
  return {};
}

}  // namespace detail

struct LangVerdict {
  enum class Kind { Equal, BoundedEqual, Distinguished };
  Kind kind = Kind::Equal;
  std::optional<TimedWord> witness;
  LangBound bound;
};

inline LangVerdict language_equivalent(const TimedSystem& sys, int x, int y,
                                       LangMode mode, LangBound bound) {
  if (!sys.has_accept) throw NoAcceptance("system has no accepting data");
  LangVerdict verdict;
  verdict.bound = bound;

  if (sys.backend == Backend::NonDet) {
    bool timed = mode == LangMode::TL || mode == LangMode::WTL;
    std::optional<SaturatedFamily> weak;
    bool exact = true;
    detail::StepSource src;
    if (mode == LangMode::TL || mode == LangMode::UTL) {
      // raw per-duration stages; the automaton construction itself merges
      // durations when comparing untimed words
      src = detail::language_steps(sys, nullptr, nullptr, nullptr, LangMode::TL);
    } else if (mode == LangMode::WUTL) {
      // single saturated stage: the weak-abstract closure
      auto fam = saturate(sys, CanonicalHom::WeakAbstract);
      weak = std::move(fam);
      src.durations.push_back(0);
      src.stage.emplace(0, &weak->member[0]);
      src.accept.emplace(0, weak->member[0].acc);
    } else {
      int64_t window = std::max<int64_t>(sys.max_duration(), 1);
      SaturationBounds b;
      b.t_max = std::max<int64_t>(bound.max_time + window, window * (sys.n_states() + 1) * 2);
      auto fam = saturate(sys, CanonicalHom::WeakTimed, b);
      // exact iff the family is silent at the tail window: nothing new can
      // appear at durations beyond t_max. Only the transition matrices and
      // the rule-based accepts matter; the composite accept column records
      // within-budget termination and never empties again.
      for (int64_t t = fam.bounds.t_max - window + 1; t <= fam.bounds.t_max; ++t) {
        const EffectEndo& m = fam.member_at_nat(t);
        for (const LV& cell : m.mat)
          if (!lv_is_bottom(cell)) exact = false;
        if (fam.has_rule_accept())
          for (const auto& a : fam.rule_accept[static_cast<size_t>(t)])
            if (!a.is_bot()) exact = false;
      }
      weak = std::move(fam);
      src = detail::language_steps(sys, &*weak, nullptr, nullptr, LangMode::WTL);
      if (!exact) {
        // fall back to the bounded comparison below
        auto sx = languages(sys, x, mode, bound);
        auto sy = languages(sys, y, mode, bound);
        if (sx.words == sy.words) {
          verdict.kind = LangVerdict::Kind::BoundedEqual;
        } else {
          verdict.kind = LangVerdict::Kind::Distinguished;
          for (const auto& [w, weight] : sx.words)
            if (!sy.words.count(w)) {
              verdict.witness = w;
              break;
            }
          if (!verdict.witness)
            for (const auto& [w, weight] : sy.words)
              if (!sx.words.count(w)) {
                verdict.witness = w;
                break;
              }
        }
        return verdict;
      }
    }
    auto nfa = detail::WordNfa::build(src, sys.n_states(), sys.n_labels(), timed);
    auto res = detail::nfa_language_equal(nfa, x, y, timed);
    if (res.equal) {
      verdict.kind = LangVerdict::Kind::Equal;
    } else {
      verdict.kind = LangVerdict::Kind::Distinguished;
      verdict.witness = std::move(res.witness);
    }
    return verdict;
  }

  // weighted / convex: exact bounded comparison
  auto sx = languages(sys, x, mode, bound);
  auto sy = languages(sys, y, mode, bound);
  if (sys.backend == Backend::QWeighted) {
    if (sx.words == sy.words) {
      verdict.kind = LangVerdict::Kind::BoundedEqual;
      return verdict;
    }
    verdict.kind = LangVerdict::Kind::Distinguished;
    for (const auto& [w, weight] : sx.words) {
      auto it = sy.words.find(w);
      if (it == sy.words.end() || !(it->second == weight)) {
        verdict.witness = w;
        return verdict;
      }
    }
    for (const auto& [w, weight] : sy.words)
      if (!sx.words.count(w)) {
        verdict.witness = w;
        return verdict;
      }
    return verdict;
  }

  // convex: align the coordinate spaces, then compare hulls
  std::map<TimedWord, int> joint;
  auto remap = [&](const LanguageSample& s) {
    std::vector<DistGenerator> out;
    for (const auto& g : s.convex) {
      DistGenerator p;
      p.accept = g.accept;
      for (const auto& [zero, wid, w] : g.mass) {
        const TimedWord& word = s.word_universe[static_cast<size_t>(wid)];
        auto [it, fresh] = joint.emplace(word, static_cast<int>(joint.size()));
        p.add(0, it->second, w);
      }
      p.normalize();
      out.push_back(std::move(p));
    }
    return out;
  };
  auto gx = remap(sx);
  auto gy = remap(sy);
  if (hulls_equal(gx, gy)) {
    verdict.kind = LangVerdict::Kind::BoundedEqual;
    return verdict;
  }
  verdict.kind = LangVerdict::Kind::Distinguished;
  std::set<int> support_x, support_y;
  for (const auto& g : gx)
    for (const auto& [zero, wid, w] : g.mass) support_x.insert(wid);
  for (const auto& g : gy)
    for (const auto& [zero, wid, w] : g.mass) support_y.insert(wid);
  for (const auto& [word, wid] : joint)
    if (support_x.count(wid) != support_y.count(wid)) {
      verdict.witness = word;
      break;
    }
  return verdict;
}

// ---------------------------------------------------------------------------
// Spectrum.
// ---------------------------------------------------------------------------

struct SpectrumRow {
  std::string name;
  Partition partition;
  bool exact = true;
  bool present = true;
  std::string note;
};

struct SpectrumResult {
  std::vector<SpectrumRow> rows;  // 4 bisimulation + 4 language rows
  struct Edge {
    std::string finer, coarser;
    bool holds = true;
    bool checked = true;
  };
  std::vector<Edge> hasse;
  bool all_edges_hold = true;
};

inline Partition language_partition(const TimedSystem& sys, LangMode mode,
                                    LangBound bound, bool& exact) {
  const int n = sys.n_states();
  std::vector<int> repr;  // representative per class
  Partition part = Partition::discrete(n);
  std::vector<int> cls(static_cast<size_t>(n), -1);
  int next = 0;
  exact = true;
  for (int x = 0; x < n; ++x) {
    bool placed = false;
    for (int r = 0; r < next && !placed; ++r) {
      auto v = language_equivalent(sys, repr[static_cast<size_t>(r)], x, mode, bound);
      if (v.kind != LangVerdict::Kind::Distinguished) {
        if (v.kind == LangVerdict::Kind::BoundedEqual) exact = false;
        cls[static_cast<size_t>(x)] = r;
        placed = true;
      }
    }
    if (!placed) {
      repr.push_back(x);
      cls[static_cast<size_t>(x)] = next++;
    }
  }
  part.block = cls;
  part.canonicalize();
  return part;
}

inline SpectrumResult spectrum(const TimedSystem& sys, SaturationBounds bounds = {},
                               LangBound lang_bound = {}) {
  SpectrumResult out;
  std::map<std::string, const Partition*> by_name;

  auto add_bisim = [&](CanonicalHom hom, const std::string& name) {
    auto fam = saturate(sys, hom, bounds);
    auto res = coarsest_bisimulation(fam);
    SpectrumRow row;
    row.name = name;
    row.partition = res.partition;
    row.exact = res.exact;
    if (!res.exact) row.note = "bounded family";
    out.rows.push_back(std::move(row));
  };
  add_bisim(CanonicalHom::StrongTimed, "strong-timed bisimulation");
  add_bisim(CanonicalHom::WeakTimed, "weak-timed bisimulation");
  add_bisim(CanonicalHom::StrongAbstract, "strong-abstract bisimulation");
  add_bisim(CanonicalHom::WeakAbstract, "weak-abstract bisimulation");

  auto add_lang = [&](LangMode mode, const std::string& name) {
    SpectrumRow row;
    row.name = name;
    if (!sys.has_accept) {
      row.present = false;
      row.note = "no acceptance data";
      row.partition = Partition::trivial(sys.n_states());
    } else {
      bool exact = true;
      row.partition = language_partition(sys, mode, lang_bound, exact);
      row.exact = exact;
      if (!exact) row.note = "bounded (" + std::to_string(lang_bound.max_len) + "," +
                             std::to_string(lang_bound.max_time) + ")";
    }
    out.rows.push_back(std::move(row));
  };
  add_lang(LangMode::TL, "strong-timed language");
  add_lang(LangMode::WTL, "weak-timed language");
  add_lang(LangMode::UTL, "strong-abstract language");
  add_lang(LangMode::WUTL, "weak-abstract language");

  // rows: 0 B-st, 1 B-wt, 2 B-sa, 3 B-wa, 4 L-st, 5 L-wt, 6 L-sa, 7 L-wa
  const int edges[][2] = {{0, 1}, {0, 2}, {1, 3}, {2, 3},  // bisimulation face
                          {4, 5}, {4, 6}, {5, 7}, {6, 7},  // language face
                          {0, 4}, {1, 5}, {2, 6}, {3, 7}}; // bisim -> language
  for (const auto& e : edges) {
    SpectrumResult::Edge edge;
    edge.finer = out.rows[static_cast<size_t>(e[0])].name;
    edge.coarser = out.rows[static_cast<size_t>(e[1])].name;
    if (!out.rows[static_cast<size_t>(e[0])].present ||
        !out.rows[static_cast<size_t>(e[1])].present) {
      edge.checked = false;
    } else {
      edge.holds = out.rows[static_cast<size_t>(e[0])].partition.refines(
          out.rows[static_cast<size_t>(e[1])].partition);
      if (!edge.holds) out.all_edges_hold = false;
    }
    out.hasse.push_back(std::move(edge));
  }
  return out;
}

}  // namespace timedeq
