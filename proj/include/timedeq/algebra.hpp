#pragma once

// Monoids, surjective monoid homomorphisms and star-quantales. Everything in
// this header is an immutable value; all arithmetic is exact.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "timedeq/errors.hpp"
#include "timedeq/rational.hpp"

namespace timedeq {

// ---------------------------------------------------------------------------
// Scalar quantale elements.
//
// All three scalar instances share one carrier representation with an
// explicit bottom. For the weighted instances the bottom is the empty
// downset of the underlying ordered monoid, distinct from the monoid unit;
// without it "no transition" and "transition of weight one" would collapse.
// ---------------------------------------------------------------------------

struct Scalar {
  enum class Tag : uint8_t { Bot, Fin, Inf };
  Tag tag = Tag::Bot;
  Rat val{};  // payload when tag == Fin

  static Scalar bot() { return {}; }
  static Scalar inf() {
    Scalar s;
    s.tag = Tag::Inf;
    return s;
  }
  static Scalar fin(Rat v) {
    Scalar s;
    s.tag = Tag::Fin;
    s.val = std::move(v);
    return s;
  }
  bool is_bot() const { return tag == Tag::Bot; }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.tag == b.tag && (a.tag != Tag::Fin || a.val == b.val);
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }
  // Structural order used only for canonical sorting, not the quantale order.
  friend bool operator<(const Scalar& a, const Scalar& b) {
    if (a.tag != b.tag) return static_cast<int>(a.tag) < static_cast<int>(b.tag);
    return a.tag == Tag::Fin && a.val < b.val;
  }
};

enum class ScalarKind { Bool, NatInfMaxPlus, UnitMinTimes };

class ScalarQuantale {
 public:
  ScalarQuantale() : kind_(ScalarKind::Bool) {}
  explicit ScalarQuantale(ScalarKind kind, bool broken_mult = false)
      : kind_(kind), broken_mult_(broken_mult) {}

  ScalarKind kind() const { return kind_; }
  bool operator==(const ScalarQuantale& o) const {
    return kind_ == o.kind_ && broken_mult_ == o.broken_mult_;
  }

  Scalar bottom() const { return Scalar::bot(); }

  Scalar one() const {
    switch (kind_) {
      case ScalarKind::Bool: return Scalar::fin(1);
      case ScalarKind::NatInfMaxPlus: return Scalar::fin(0);
      case ScalarKind::UnitMinTimes: return Scalar::fin(1);
    }
    return Scalar::bot();
  }

  Scalar join(const Scalar& a, const Scalar& b) const {
    if (a.is_bot()) return b;
    if (b.is_bot()) return a;
    switch (kind_) {
      case ScalarKind::Bool:
        return one();
      case ScalarKind::NatInfMaxPlus:
        if (a.tag == Scalar::Tag::Inf || b.tag == Scalar::Tag::Inf) return Scalar::inf();
        return Scalar::fin(std::max(a.val, b.val));
      case ScalarKind::UnitMinTimes:
        return Scalar::fin(std::min(a.val, b.val));  // reversed order: sup = numeric min
    }
    return Scalar::bot();
  }

  Scalar mult(const Scalar& a, const Scalar& b) const {
    if (a.is_bot() || b.is_bot()) return Scalar::bot();
    if (broken_mult_) {
      // negative-control instance: |a - b| is not join-distributive
      Rat d = a.val - b.val;
      if (d < 0) d = -d;
      return Scalar::fin(d);
    }
    switch (kind_) {
      case ScalarKind::Bool:
        return one();
      case ScalarKind::NatInfMaxPlus:
        if (a.tag == Scalar::Tag::Inf || b.tag == Scalar::Tag::Inf) return Scalar::inf();
        return Scalar::fin(a.val + b.val);
      case ScalarKind::UnitMinTimes:
        return Scalar::fin(a.val * b.val);
    }
    return Scalar::bot();
  }

  bool leq(const Scalar& a, const Scalar& b) const {
    if (a.is_bot()) return true;
    if (b.is_bot()) return false;
    switch (kind_) {
      case ScalarKind::Bool:
        return true;
      case ScalarKind::NatInfMaxPlus:
        if (b.tag == Scalar::Tag::Inf) return true;
        if (a.tag == Scalar::Tag::Inf) return false;
        return a.val <= b.val;
      case ScalarKind::UnitMinTimes:
        return b.val <= a.val;  // reversed order
    }
    return false;
  }

  // star(a) = \/_{n>=0} a^n, closed form per instance.
  Scalar star(const Scalar& a) const {
    if (a.is_bot()) return one();
    switch (kind_) {
      case ScalarKind::Bool:
        return one();
      case ScalarKind::NatInfMaxPlus:
        if (a.tag == Scalar::Tag::Inf || a.val > 0) return Scalar::inf();
        return Scalar::fin(0);
      case ScalarKind::UnitMinTimes:
        if (a.val == 1) return Scalar::fin(1);
        return Scalar::fin(0);  // inf_n a^n for a < 1
    }
    return Scalar::bot();
  }

  bool valid(const Scalar& a) const {
    switch (kind_) {
      case ScalarKind::Bool:
        return a.is_bot() || a == Scalar::fin(1);
      case ScalarKind::NatInfMaxPlus:
        return a.is_bot() || a.tag == Scalar::Tag::Inf ||
               (a.val >= 0 && denominator(a.val) == 1);
      case ScalarKind::UnitMinTimes:
        return a.is_bot() || (a.tag == Scalar::Tag::Fin && a.val >= 0 && a.val <= 1);
    }
    return false;
  }

  std::string format(const Scalar& a) const {
    if (kind_ == ScalarKind::Bool) return a.is_bot() ? "0" : "1";
    if (a.is_bot()) return "bot";
    if (a.tag == Scalar::Tag::Inf) return "inf";
    return format_rat(a.val);
  }

  Scalar parse(const std::string& text) const {
    Scalar s;
    if (kind_ == ScalarKind::Bool) {
      if (text == "0" || text == "false" || text == "bot") return Scalar::bot();
      if (text == "1" || text == "true") return Scalar::fin(1);
      throw ValidationError("bad boolean weight '" + text + "'");
    }
    if (text == "bot") return Scalar::bot();
    if (text == "inf") {
      if (kind_ != ScalarKind::NatInfMaxPlus)
        throw ValidationError("'inf' is only a nat-inf-max-plus weight");
      return Scalar::inf();
    }
    s = Scalar::fin(parse_rat(text));
    if (!valid(s)) throw ValidationError("weight '" + text + "' outside quantale carrier");
    return s;
  }

  std::vector<Scalar> samples(size_t count, uint64_t seed) const {
    std::vector<Scalar> out;
    out.push_back(bottom());
    out.push_back(one());
    std::mt19937_64 rng(seed);
    switch (kind_) {
      case ScalarKind::Bool:
        break;
      case ScalarKind::NatInfMaxPlus: {
        out.push_back(Scalar::inf());
        std::uniform_int_distribution<int64_t> d(0, 12);
        while (out.size() < count) out.push_back(Scalar::fin(d(rng)));
        break;
      }
      case ScalarKind::UnitMinTimes: {
        out.push_back(Scalar::fin(0));
        std::uniform_int_distribution<int64_t> num(0, 8), den(1, 8);
        while (out.size() < count) {
          int64_t q = den(rng);
          int64_t p = std::min(num(rng), q);
          out.push_back(Scalar::fin(Rat(p, q)));
        }
        break;
      }
    }
    if (out.size() > count) out.resize(std::max<size_t>(count, 2));
    return out;
  }

 private:
  ScalarKind kind_;
  bool broken_mult_ = false;
};

// ---------------------------------------------------------------------------
// Labelled quantale values: elements of Q^{Sigma_tau} under convolution.
// Index 0 is tau, indices 1..n the visible labels.
// ---------------------------------------------------------------------------

struct LV {
  std::vector<Scalar> w;

  friend bool operator==(const LV& a, const LV& b) { return a.w == b.w; }
  friend bool operator!=(const LV& a, const LV& b) { return !(a == b); }
  friend bool operator<(const LV& a, const LV& b) { return a.w < b.w; }
};

inline LV lv_bottom(const ScalarQuantale& q, size_t n_labels) {
  LV v;
  v.w.assign(n_labels + 1, q.bottom());
  return v;
}

inline LV lv_one(const ScalarQuantale& q, size_t n_labels) {
  LV v = lv_bottom(q, n_labels);
  v.w[0] = q.one();
  return v;
}

inline bool lv_is_bottom(const LV& v) {
  return std::all_of(v.w.begin(), v.w.end(), [](const Scalar& s) { return s.is_bot(); });
}

inline LV lv_join(const ScalarQuantale& q, const LV& a, const LV& b) {
  LV out;
  out.w.resize(a.w.size());
  for (size_t i = 0; i < a.w.size(); ++i) out.w[i] = q.join(a.w[i], b.w[i]);
  return out;
}

// Convolution: (a.b)(sigma) = \/ { a(s1).b(s2) | {s1,s2} = {sigma,tau} }.
inline LV lv_mult(const ScalarQuantale& q, const LV& a, const LV& b) {
  LV out;
  out.w.resize(a.w.size());
  out.w[0] = q.mult(a.w[0], b.w[0]);
  for (size_t i = 1; i < a.w.size(); ++i)
    out.w[i] = q.join(q.mult(a.w[i], b.w[0]), q.mult(a.w[0], b.w[i]));
  return out;
}

inline bool lv_leq(const ScalarQuantale& q, const LV& a, const LV& b) {
  for (size_t i = 0; i < a.w.size(); ++i)
    if (!q.leq(a.w[i], b.w[i])) return false;
  return true;
}

// a* = (tau -> a(tau)*, sigma -> a(tau)* . a(sigma) . a(tau)*).
inline LV lv_star(const ScalarQuantale& q, const LV& a) {
  LV out;
  out.w.resize(a.w.size());
  Scalar s0 = q.star(a.w[0]);
  out.w[0] = s0;
  for (size_t i = 1; i < a.w.size(); ++i) out.w[i] = q.mult(q.mult(s0, a.w[i]), s0);
  return out;
}

// ---------------------------------------------------------------------------
// Monoids.
// ---------------------------------------------------------------------------

struct MonoidElem {
  int64_t nat = 0;             // NatAdd payload
  std::vector<int64_t> word;   // FreeWords payload
  int idx = 0;                 // finite-table payload
};

struct MonoidSpec {
  enum class Kind { NatAdd, Trivial, FreeWords, Table };

  Kind kind = Kind::Trivial;
  std::vector<int64_t> letters;   // FreeWords alphabet (sorted); unused when unit_letter
  bool unit_letter = false;       // FreeWords over the one-point alphabet, 1* ~ N
  int64_t enumeration_bound = 1'000'000;
  // Finite table presentation:
  std::vector<std::string> elem_names;
  std::vector<std::vector<int>> table;
  int unit_index = 0;

  static MonoidSpec nat_add(int64_t bound = 1'000'000) {
    MonoidSpec m;
    m.kind = Kind::NatAdd;
    m.enumeration_bound = bound;
    return m;
  }
  static MonoidSpec trivial() {
    MonoidSpec m;
    m.kind = Kind::Trivial;
    return m;
  }
  static MonoidSpec free_words(std::vector<int64_t> letters, int64_t bound = 1'000'000) {
    MonoidSpec m;
    m.kind = Kind::FreeWords;
    std::sort(letters.begin(), letters.end());
    letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
    m.letters = std::move(letters);
    m.enumeration_bound = bound;
    return m;
  }
  static MonoidSpec star_words(int64_t bound = 1'000'000) {
    MonoidSpec m;
    m.kind = Kind::FreeWords;
    m.unit_letter = true;
    m.enumeration_bound = bound;
    return m;
  }
  static MonoidSpec finite(std::vector<std::string> names,
                           std::vector<std::vector<int>> op, int unit) {
    MonoidSpec m;
    m.kind = Kind::Table;
    m.elem_names = std::move(names);
    m.table = std::move(op);
    m.unit_index = unit;
    const int n = static_cast<int>(m.elem_names.size());
    if (static_cast<int>(m.table.size()) != n)
      throw ValidationError("monoid table has wrong row count");
    for (auto& row : m.table) {
      if (static_cast<int>(row.size()) != n)
        throw ValidationError("monoid table has wrong column count");
      for (int v : row)
        if (v < 0 || v >= n) throw ValidationError("monoid table entry out of range");
    }
    if (unit < 0 || unit >= n) throw ValidationError("monoid unit index out of range");
    for (int a = 0; a < n; ++a) {
      if (m.table[unit][a] != a || m.table[a][unit] != a)
        throw ValidationError("monoid unit law fails at element " + m.elem_names[a]);
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (m.table[m.table[a][b]][c] != m.table[a][m.table[b][c]])
            throw ValidationError("monoid associativity fails");
    }
    return m;
  }

  bool same_as(const MonoidSpec& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::FreeWords)
      return unit_letter == o.unit_letter && (unit_letter || letters == o.letters);
    if (kind == Kind::Table) return table == o.table && unit_index == o.unit_index;
    return true;
  }

  MonoidElem unit() const {
    MonoidElem e;
    e.idx = unit_index;
    return e;
  }

  MonoidElem op(const MonoidElem& a, const MonoidElem& b) const {
    MonoidElem e;
    switch (kind) {
      case Kind::NatAdd: e.nat = a.nat + b.nat; break;
      case Kind::Trivial: break;
      case Kind::FreeWords:
        e.word = a.word;
        e.word.insert(e.word.end(), b.word.begin(), b.word.end());
        break;
      case Kind::Table: e.idx = table[a.idx][b.idx]; break;
    }
    return e;
  }

  bool eq(const MonoidElem& a, const MonoidElem& b) const {
    switch (kind) {
      case Kind::NatAdd: return a.nat == b.nat;
      case Kind::Trivial: return true;
      case Kind::FreeWords: return a.word == b.word;
      case Kind::Table: return a.idx == b.idx;
    }
    return false;
  }

  // Enumeration-bound check; the bound counts the element for NatAdd and the
  // letter sum (or length over the one-point alphabet) for FreeWords.
  bool within_bound(const MonoidElem& e) const {
    switch (kind) {
      case Kind::NatAdd: return e.nat >= 0 && e.nat <= enumeration_bound;
      case Kind::Trivial: return true;
      case Kind::FreeWords: {
        int64_t total = 0;
        for (int64_t l : e.word) {
          if (!unit_letter &&
              !std::binary_search(letters.begin(), letters.end(), l))
            return false;
          total += unit_letter ? 1 : l;
        }
        return total <= enumeration_bound;
      }
      case Kind::Table:
        return e.idx >= 0 && e.idx < static_cast<int>(elem_names.size());
    }
    return false;
  }

  std::string format(const MonoidElem& e) const {
    switch (kind) {
      case Kind::NatAdd: return std::to_string(e.nat);
      case Kind::Trivial: return "*";
      case Kind::FreeWords: {
        if (e.word.empty()) return "()";
        std::string out = "(";
        for (size_t i = 0; i < e.word.size(); ++i) {
          if (i) out += ",";
          out += unit_letter ? "*" : std::to_string(e.word[i]);
        }
        return out + ")";
      }
      case Kind::Table: return elem_names[e.idx];
    }
    return "?";
  }

  std::vector<MonoidElem> sample(size_t count, uint64_t seed) const {
    std::vector<MonoidElem> out;
    std::mt19937_64 rng(seed);
    switch (kind) {
      case Kind::NatAdd: {
        std::uniform_int_distribution<int64_t> d(0, std::min<int64_t>(20, enumeration_bound));
        for (size_t i = 0; i < count; ++i) {
          MonoidElem e;
          e.nat = i == 0 ? 0 : d(rng);
          out.push_back(e);
        }
        break;
      }
      case Kind::Trivial:
        out.assign(count, MonoidElem{});
        break;
      case Kind::FreeWords: {
        std::uniform_int_distribution<size_t> len(0, 4);
        for (size_t i = 0; i < count; ++i) {
          MonoidElem e;
          size_t n = i == 0 ? 0 : len(rng);
          for (size_t j = 0; j < n; ++j) {
            if (unit_letter) {
              e.word.push_back(0);
            } else if (!letters.empty()) {
              std::uniform_int_distribution<size_t> pick(0, letters.size() - 1);
              e.word.push_back(letters[pick(rng)]);
            }
          }
          out.push_back(e);
        }
        break;
      }
      case Kind::Table: {
        std::uniform_int_distribution<int> d(0, static_cast<int>(elem_names.size()) - 1);
        for (size_t i = 0; i < count; ++i) {
          MonoidElem e;
          e.idx = i == 0 ? unit_index : d(rng);
          out.push_back(e);
        }
        break;
      }
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Monoid homomorphisms. All built-ins are surjective onto their target
// (reading the duration-letter alphabet as a finite presentation of the full
// time monoid). Finite-table homs are checked for surjectivity on creation.
// ---------------------------------------------------------------------------

class MonoidHom {
 public:
  enum class Kind { Identity, Bang, Counit, StarLift, Compose, Table };

  Kind kind = Kind::Identity;
  MonoidSpec source, target;
  std::shared_ptr<const MonoidHom> inner;  // StarLift: lifted hom; Compose: applied first
  std::shared_ptr<const MonoidHom> outer;  // Compose: applied second
  std::vector<int> map;                    // Table

  static MonoidHom identity(MonoidSpec m) {
    MonoidHom h;
    h.kind = Kind::Identity;
    h.source = m;
    h.target = std::move(m);
    return h;
  }

  static MonoidHom bang(MonoidSpec m) {
    MonoidHom h;
    h.kind = Kind::Bang;
    h.source = std::move(m);
    h.target = MonoidSpec::trivial();
    return h;
  }

  // Counit of the free-monoid adjunction: folds a word of base elements with
  // the base operation. `letters` names the finitely many letters in play.
  static MonoidHom counit(MonoidSpec base, std::vector<int64_t> letters = {}) {
    MonoidHom h;
    h.kind = Kind::Counit;
    if (base.kind == MonoidSpec::Kind::Trivial) {
      h.source = MonoidSpec::star_words();
    } else if (base.kind == MonoidSpec::Kind::NatAdd) {
      h.source = MonoidSpec::free_words(std::move(letters), base.enumeration_bound);
    } else {
      throw UnsupportedHom("counit is provided for NatAdd and Trivial bases");
    }
    h.target = std::move(base);
    return h;
  }

  // Letterwise lift h*: M* -> N* of h: M -> N, over a finite letter set.
  static MonoidHom star_lift(MonoidHom lifted, std::vector<int64_t> source_letters) {
    MonoidHom h;
    h.kind = Kind::StarLift;
    if (lifted.source.kind != MonoidSpec::Kind::NatAdd)
      throw UnsupportedHom("star_lift expects a hom out of NatAdd letters");
    h.source = MonoidSpec::free_words(std::move(source_letters));
    if (lifted.target.kind == MonoidSpec::Kind::Trivial) {
      h.target = MonoidSpec::star_words();
    } else if (lifted.target.kind == MonoidSpec::Kind::NatAdd) {
      std::vector<int64_t> image;
      for (int64_t l : h.source.letters) {
        MonoidElem e;
        e.nat = l;
        image.push_back(apply_node(lifted, e).nat);
      }
      h.target = MonoidSpec::free_words(std::move(image));
    } else {
      throw UnsupportedHom("star_lift target must be NatAdd or Trivial");
    }
    h.inner = std::make_shared<const MonoidHom>(std::move(lifted));
    return h;
  }

  static MonoidHom compose(MonoidHom first, MonoidHom then) {
    if (!first.target.same_as(then.source))
      throw ValidationError("hom composition: target/source mismatch");
    MonoidHom h;
    h.kind = Kind::Compose;
    h.source = first.source;
    h.target = then.target;
    h.inner = std::make_shared<const MonoidHom>(std::move(first));
    h.outer = std::make_shared<const MonoidHom>(std::move(then));
    return h;
  }

  static MonoidHom finite(MonoidSpec source, MonoidSpec target, std::vector<int> map) {
    if (source.kind != MonoidSpec::Kind::Table || target.kind != MonoidSpec::Kind::Table)
      throw UnsupportedHom("finite homs require finite-table monoids");
    if (map.size() != source.elem_names.size())
      throw ValidationError("hom map has wrong size");
    MonoidHom h;
    h.kind = Kind::Table;
    h.source = std::move(source);
    h.target = std::move(target);
    h.map = std::move(map);
    const int n = static_cast<int>(h.source.elem_names.size());
    if (h.map[h.source.unit_index] != h.target.unit_index)
      throw ValidationError("hom does not preserve the unit");
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (h.map[h.source.table[a][b]] != h.target.table[h.map[a]][h.map[b]])
          throw ValidationError("hom does not preserve the operation");
    std::vector<bool> hit(h.target.elem_names.size(), false);
    for (int v : h.map) hit[v] = true;
    if (!std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }))
      throw ValidationError("hom is not surjective");
    return h;
  }

  MonoidElem apply(const MonoidElem& m) const {
    if (!source.within_bound(m))
      throw BoundExceeded("element " + source.format(m) + " outside enumeration bound");
    return apply_node(*this, m);
  }

 private:
  static MonoidElem apply_node(const MonoidHom& h, const MonoidElem& m) {
    switch (h.kind) {
      case Kind::Identity:
        return m;
      case Kind::Bang:
        return h.target.unit();
      case Kind::Counit: {
        MonoidElem acc = h.target.unit();
        for (int64_t l : m.word) {
          MonoidElem letter;
          letter.nat = l;
          acc = h.target.op(acc, letter);
        }
        return acc;
      }
      case Kind::StarLift: {
        MonoidElem out;
        for (int64_t l : m.word) {
          MonoidElem letter;
          letter.nat = l;
          MonoidElem img = apply_node(*h.inner, letter);
          out.word.push_back(h.target.unit_letter ? 0 : img.nat);
        }
        return out;
      }
      case Kind::Compose:
        return apply_node(*h.outer, apply_node(*h.inner, m));
      case Kind::Table: {
        MonoidElem out;
        out.idx = h.map[m.idx];
        return out;
      }
    }
    return m;
  }
};

inline MonoidElem hom_apply(const MonoidHom& h, const MonoidElem& m) { return h.apply(m); }

// ---------------------------------------------------------------------------
// StarQuantale: the public face over both scalar and labelled carriers.
// ---------------------------------------------------------------------------

struct QValue {
  bool labelled = false;
  Scalar s;
  LV lv;

  friend bool operator==(const QValue& a, const QValue& b) {
    if (a.labelled != b.labelled) return false;
    return a.labelled ? a.lv == b.lv : a.s == b.s;
  }
};

class StarQuantale {
 public:
  enum class Kind { Bool, NatInfMaxPlus, UnitMinTimes, Label, Labelled };

  static StarQuantale boolean() { return StarQuantale(Kind::Bool, ScalarKind::Bool, {}); }
  static StarQuantale nat_inf_max_plus() {
    return StarQuantale(Kind::NatInfMaxPlus, ScalarKind::NatInfMaxPlus, {});
  }
  static StarQuantale unit_min_times() {
    return StarQuantale(Kind::UnitMinTimes, ScalarKind::UnitMinTimes, {});
  }
  // P(Sigma_tau) with the label-absorption product; identical to the labelled
  // extension of the boolean instance, presented with set notation.
  static StarQuantale label(std::vector<std::string> alphabet) {
    return StarQuantale(Kind::Label, ScalarKind::Bool, std::move(alphabet));
  }
  static StarQuantale labelled(const StarQuantale& base, std::vector<std::string> alphabet) {
    if (base.is_labelled()) throw ValidationError("labelled quantale needs a scalar base");
    return StarQuantale(Kind::Labelled, base.base_.kind(), std::move(alphabet));
  }
  static StarQuantale by_key(const std::string& key) {
    if (key == "bool") return boolean();
    if (key == "nat-inf-max-plus") return nat_inf_max_plus();
    if (key == "unit-min-times") return unit_min_times();
    throw ValidationError("unknown quantale key '" + key + "'");
  }
  // Deliberately violates join-distributivity of mult; negative control for
  // the law harness.
  static StarQuantale broken_for_tests() {
    StarQuantale q(Kind::NatInfMaxPlus, ScalarKind::NatInfMaxPlus, {});
    q.base_ = ScalarQuantale(ScalarKind::NatInfMaxPlus, /*broken_mult=*/true);
    return q;
  }

  Kind kind() const { return kind_; }
  bool is_labelled() const { return kind_ == Kind::Label || kind_ == Kind::Labelled; }
  const ScalarQuantale& base() const { return base_; }
  const std::vector<std::string>& alphabet() const { return labels_; }
  size_t n_labels() const { return labels_.size(); }

  std::string key() const {
    switch (kind_) {
      case Kind::Bool: return "bool";
      case Kind::NatInfMaxPlus: return "nat-inf-max-plus";
      case Kind::UnitMinTimes: return "unit-min-times";
      case Kind::Label: return "label";
      case Kind::Labelled: return "labelled";
    }
    return "?";
  }

  QValue bottom() const { return wrap(lv_bottom(base_, labels_.size()), base_.bottom()); }
  QValue one() const { return wrap(lv_one(base_, labels_.size()), base_.one()); }
  QValue join(const QValue& a, const QValue& b) const {
    return is_labelled() ? wrap_lv(lv_join(base_, a.lv, b.lv)) : wrap_s(base_.join(a.s, b.s));
  }
  QValue mult(const QValue& a, const QValue& b) const {
    return is_labelled() ? wrap_lv(lv_mult(base_, a.lv, b.lv)) : wrap_s(base_.mult(a.s, b.s));
  }
  QValue star(const QValue& a) const {
    return is_labelled() ? wrap_lv(lv_star(base_, a.lv)) : wrap_s(base_.star(a.s));
  }
  bool leq(const QValue& a, const QValue& b) const {
    return is_labelled() ? lv_leq(base_, a.lv, b.lv) : base_.leq(a.s, b.s);
  }
  bool eq(const QValue& a, const QValue& b) const { return a == b; }

  QValue indexed_join(const std::vector<QValue>& vs) const {
    QValue acc = bottom();
    for (const auto& v : vs) acc = join(acc, v);
    return acc;
  }

  QValue scalar(Scalar s) const { return wrap_s(std::move(s)); }
  QValue from_lv(LV v) const { return wrap_lv(std::move(v)); }

  std::string format(const QValue& v) const {
    if (!is_labelled()) return base_.format(v.s);
    if (kind_ == Kind::Label) {
      std::string out = "{";
      bool first = true;
      for (size_t i = 0; i < v.lv.w.size(); ++i) {
        if (v.lv.w[i].is_bot()) continue;
        if (!first) out += ",";
        out += label_name(i);
        first = false;
      }
      return out + "}";
    }
    std::string out = "[";
    for (size_t i = 0; i < v.lv.w.size(); ++i) {
      if (i) out += ",";
      out += label_name(i) + ":" + base_.format(v.lv.w[i]);
    }
    return out + "]";
  }

  std::vector<QValue> samples(size_t count, uint64_t seed) const {
    std::vector<QValue> out;
    if (!is_labelled()) {
      for (auto& s : base_.samples(count, seed)) out.push_back(wrap_s(std::move(s)));
      return out;
    }
    std::mt19937_64 rng(seed);
    auto pool = base_.samples(std::max<size_t>(4, count / 4), seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    out.push_back(bottom());
    out.push_back(one());
    while (out.size() < count) {
      LV v = lv_bottom(base_, labels_.size());
      for (auto& s : v.w) s = pool[pick(rng)];
      out.push_back(wrap_lv(std::move(v)));
    }
    return out;
  }

 private:
  StarQuantale(Kind kind, ScalarKind base, std::vector<std::string> labels)
      : kind_(kind), base_(base), labels_(std::move(labels)) {}

  std::string label_name(size_t i) const { return i == 0 ? "tau" : labels_[i - 1]; }

  QValue wrap(LV lv, Scalar s) const {
    QValue v;
    v.labelled = is_labelled();
    v.lv = std::move(lv);
    v.s = std::move(s);
    return v;
  }
  QValue wrap_lv(LV lv) const {
    QValue v;
    v.labelled = true;
    v.lv = std::move(lv);
    return v;
  }
  QValue wrap_s(Scalar s) const {
    QValue v;
    v.labelled = false;
    v.s = std::move(s);
    return v;
  }

  Kind kind_;
  ScalarQuantale base_;
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Quantale law harness.
// ---------------------------------------------------------------------------

struct QuantaleLawReport {
  struct Entry {
    std::string law;
    bool pass = true;
    std::string counterexample;
  };
  std::vector<Entry> entries;

  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const Entry& e) { return e.pass; });
  }
  const Entry* find(const std::string& law) const {
    for (const auto& e : entries)
      if (e.law == law) return &e;
    return nullptr;
  }
};

inline QuantaleLawReport verify_quantale(const StarQuantale& q, size_t sample_count,
                                         uint64_t seed) {
  if (sample_count < 1) throw ValidationError("sample_count must be at least 1");
  auto xs = q.samples(std::max<size_t>(sample_count, 2), seed);
  QuantaleLawReport report;

  auto check = [&](const std::string& law, auto&& pred, int arity) {
    QuantaleLawReport::Entry entry;
    entry.law = law;
    size_t n = xs.size();
    // Walk deterministic tuples; cap the cube at roughly sample_count probes.
    std::mt19937_64 rng(seed ^ std::hash<std::string>{}(law));
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    size_t probes = std::max<size_t>(sample_count, 16);
    for (size_t i = 0; i < probes && entry.pass; ++i) {
      const QValue& a = xs[i % n];
      const QValue& b = xs[pick(rng)];
      const QValue& c = xs[pick(rng)];
      bool ok = arity == 1 ? pred(a, a, a) : arity == 2 ? pred(a, b, b) : pred(a, b, c);
      if (!ok) {
        entry.pass = false;
        entry.counterexample =
            "a=" + q.format(a) + " b=" + q.format(b) + " c=" + q.format(c);
      }
    }
    report.entries.push_back(std::move(entry));
  };

  check("mult associative",
        [&](const QValue& a, const QValue& b, const QValue& c) {
          return q.eq(q.mult(q.mult(a, b), c), q.mult(a, q.mult(b, c)));
        },
        3);
  check("one is a two-sided unit",
        [&](const QValue& a, const QValue&, const QValue&) {
          return q.eq(q.mult(q.one(), a), a) && q.eq(q.mult(a, q.one()), a);
        },
        1);
  check("join idempotent",
        [&](const QValue& a, const QValue&, const QValue&) {
          return q.eq(q.join(a, a), a);
        },
        1);
  check("join commutative",
        [&](const QValue& a, const QValue& b, const QValue&) {
          return q.eq(q.join(a, b), q.join(b, a));
        },
        2);
  check("join associative",
        [&](const QValue& a, const QValue& b, const QValue& c) {
          return q.eq(q.join(q.join(a, b), c), q.join(a, q.join(b, c)));
        },
        3);
  check("bottom neutral for join",
        [&](const QValue& a, const QValue&, const QValue&) {
          return q.eq(q.join(q.bottom(), a), a);
        },
        1);
  check("bottom absorbing for mult",
        [&](const QValue& a, const QValue&, const QValue&) {
          return q.eq(q.mult(q.bottom(), a), q.bottom()) &&
                 q.eq(q.mult(a, q.bottom()), q.bottom());
        },
        1);
  check("mult distributes over join (left)",
        [&](const QValue& a, const QValue& b, const QValue& c) {
          return q.eq(q.mult(a, q.join(b, c)), q.join(q.mult(a, b), q.mult(a, c)));
        },
        3);
  check("mult distributes over join (right)",
        [&](const QValue& a, const QValue& b, const QValue& c) {
          return q.eq(q.mult(q.join(a, b), c), q.join(q.mult(a, c), q.mult(b, c)));
        },
        3);
  check("leq coherent with join",
        [&](const QValue& a, const QValue& b, const QValue&) {
          return q.leq(a, b) == q.eq(q.join(a, b), b);
        },
        2);
  check("star unfolding star(a) = one v a.star(a)",
        [&](const QValue& a, const QValue&, const QValue&) {
          return q.eq(q.star(a), q.join(q.one(), q.mult(a, q.star(a))));
        },
        1);
  check("star idempotent",
        [&](const QValue& a, const QValue&, const QValue&) {
          return q.eq(q.star(q.star(a)), q.star(a));
        },
        1);
  return report;
}

}  // namespace timedeq
