#pragma once

// Timed automata with clock guards, compiled to finite timed systems under
// discrete time. Clocks saturate at (max guard constant + 1), which leaves
// every guard's truth value unchanged.

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "timedeq/systems.hpp"

namespace timedeq {

// Guard grammar: c <= r | r <= c | !g | g & g. Strict comparisons are surface
// syntax desugared into negations.
struct Guard {
  enum class Kind { Le, Ge, Not, And };  // Le: clock <= bound; Ge: bound <= clock
  Kind kind = Kind::Le;
  int clock = 0;
  int64_t bound = 0;
  std::shared_ptr<const Guard> a, b;

  static std::shared_ptr<const Guard> le(int clock, int64_t bound) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::Le;
    g->clock = clock;
    g->bound = bound;
    return g;
  }
  static std::shared_ptr<const Guard> ge(int clock, int64_t bound) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::Ge;
    g->clock = clock;
    g->bound = bound;
    return g;
  }
  static std::shared_ptr<const Guard> negate(std::shared_ptr<const Guard> inner) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::Not;
    g->a = std::move(inner);
    return g;
  }
  static std::shared_ptr<const Guard> conj(std::shared_ptr<const Guard> l,
                                           std::shared_ptr<const Guard> r) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::And;
    g->a = std::move(l);
    g->b = std::move(r);
    return g;
  }
};

using Valuation = std::vector<int64_t>;

inline bool eval_guard(const Guard& g, const Valuation& v) {
  switch (g.kind) {
    case Guard::Kind::Le: return v[static_cast<size_t>(g.clock)] <= g.bound;
    case Guard::Kind::Ge: return g.bound <= v[static_cast<size_t>(g.clock)];
    case Guard::Kind::Not: return !eval_guard(*g.a, v);
    case Guard::Kind::And: return eval_guard(*g.a, v) && eval_guard(*g.b, v);
  }
  return false;
}

inline int64_t max_guard_constant(const Guard& g) {
  switch (g.kind) {
    case Guard::Kind::Le:
    case Guard::Kind::Ge: return g.bound;
    case Guard::Kind::Not: return max_guard_constant(*g.a);
    case Guard::Kind::And:
      return std::max(max_guard_constant(*g.a), max_guard_constant(*g.b));
  }
  return 0;
}

// Advance all clocks by t (saturating at cap), then reset the listed clocks.
inline Valuation advance_reset(const Valuation& v, int64_t t,
                               const std::set<int>& resets, int64_t cap) {
  Valuation out = v;
  for (auto& c : out) c = std::min(c + t, cap);
  for (int c : resets) out[static_cast<size_t>(c)] = 0;
  return out;
}

struct TimedEdge {
  int from = 0;
  std::shared_ptr<const Guard> guard;  // null = trivially true
  std::string guard_text;
  std::set<int> resets;
  int label = 0;  // index into the alphabet (no tau on edges)
  int to = 0;
};

struct TimedAutomaton {
  std::vector<std::string> alphabet;
  std::vector<std::string> locations;
  std::vector<std::string> clocks;
  std::vector<TimedEdge> edges;
  std::set<int> accepting;
  std::vector<int> initial;  // defaults to every location

  int location_index(const std::string& name) const {
    for (size_t i = 0; i < locations.size(); ++i)
      if (locations[i] == name) return static_cast<int>(i);
    throw ValidationError("unknown location '" + name + "'");
  }
  int clock_index(const std::string& name) const {
    for (size_t i = 0; i < clocks.size(); ++i)
      if (clocks[i] == name) return static_cast<int>(i);
    throw ValidationError("undeclared clock '" + name + "'");
  }
  int64_t clock_cap() const {
    int64_t cap = 0;
    for (const auto& e : edges)
      if (e.guard) cap = std::max(cap, max_guard_constant(*e.guard));
    return cap + 1;
  }
};

// ---------------------------------------------------------------------------
// Guard parsing: atom (`c <= 5`, `5 <= c`, also <, >, >=), `!`, `&`, parens.
// ---------------------------------------------------------------------------

namespace detail {

struct GuardParser {
  const std::string& text;
  const TimedAutomaton& ta;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("guard '" + text + "' at position " + std::to_string(pos) +
                          ": " + what);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(const std::string& tok) {
    skip_ws();
    if (text.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }

  std::shared_ptr<const Guard> parse() {
    auto g = expr();
    skip_ws();
    if (pos != text.size()) fail("trailing input");
    return g;
  }

  std::shared_ptr<const Guard> expr() {
    auto left = term();
    while (true) {
      skip_ws();
      if (eat("&")) {
        auto right = term();
        left = Guard::conj(std::move(left), std::move(right));
      } else {
        return left;
      }
    }
  }

  std::shared_ptr<const Guard> term() {
    skip_ws();
    if (eat("!")) return Guard::negate(term());
    if (eat("(")) {
      auto g = expr();
      if (!eat(")")) fail("expected ')'");
      return g;
    }
    return atom();
  }

  struct Operand {
    bool is_clock = false;
    int clock = 0;
    int64_t value = 0;
  };

  Operand operand() {
    skip_ws();
    if (pos >= text.size()) fail("expected an operand");
    if (std::isdigit(static_cast<unsigned char>(text[pos]))) {
      size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      Operand o;
      o.value = std::stoll(text.substr(start, pos - start));
      return o;
    }
    if (text[pos] == '-') fail("guard constants must be non-negative integers");
    if (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_') {
      size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      Operand o;
      o.is_clock = true;
      o.clock = ta.clock_index(text.substr(start, pos - start));
      return o;
    }
    fail("expected a clock or a constant");
  }

  std::shared_ptr<const Guard> atom() {
    Operand lhs = operand();
    skip_ws();
    std::string op;
    for (const char* cand : {"<=", ">=", "<", ">"}) {
      if (eat(cand)) {
        op = cand;
        break;
      }
    }
    if (op.empty()) fail("expected a comparison");
    Operand rhs = operand();
    if (lhs.is_clock == rhs.is_clock)
      fail("comparisons relate one clock and one constant");

    // normalize to clock-on-the-left, flipping the comparison if needed
    bool clock_left = lhs.is_clock;
    int clock = clock_left ? lhs.clock : rhs.clock;
    int64_t bound = clock_left ? rhs.value : lhs.value;
    if (!clock_left) {
      if (op == "<=") op = ">=";
      else if (op == ">=") op = "<=";
      else if (op == "<") op = ">";
      else op = "<";
    }
    if (op == "<=") return Guard::le(clock, bound);
    if (op == ">=") return Guard::ge(clock, bound);
    if (op == "<") return Guard::negate(Guard::ge(clock, bound));   // c < r = !(r <= c)
    return Guard::negate(Guard::le(clock, bound));                  // c > r = !(c <= r)
  }
};

}  // namespace detail

inline std::shared_ptr<const Guard> parse_guard(const std::string& text,
                                                const TimedAutomaton& ta) {
  detail::GuardParser p{text, ta};
  return p.parse();
}

inline TimedAutomaton parse_automaton(const nlohmann::ordered_json& doc) {
  TimedAutomaton ta;
  if (!doc.contains("locations") || doc.at("locations").empty())
    throw ValidationError("automaton needs a non-empty 'locations' array");
  for (const auto& s : doc.value("alphabet", nlohmann::ordered_json::array())) {
    std::string name = s.get<std::string>();
    if (name == "tau") throw ValidationError("alphabet: 'tau' is reserved");
    ta.alphabet.push_back(name);
  }
  for (const auto& s : doc.at("locations")) ta.locations.push_back(s.get<std::string>());
  for (const auto& s : doc.value("clocks", nlohmann::ordered_json::array()))
    ta.clocks.push_back(s.get<std::string>());

  for (const auto& e : doc.value("edges", nlohmann::ordered_json::array())) {
    TimedEdge edge;
    edge.from = ta.location_index(e.at("from").get<std::string>());
    edge.to = ta.location_index(e.at("to").get<std::string>());
    std::string label = e.at("label").get<std::string>();
    auto it = std::find(ta.alphabet.begin(), ta.alphabet.end(), label);
    if (it == ta.alphabet.end()) throw ValidationError("unknown edge label '" + label + "'");
    edge.label = static_cast<int>(it - ta.alphabet.begin());
    edge.guard_text = e.value("guard", "");
    for (const auto& r : e.value("resets", nlohmann::ordered_json::array()))
      edge.resets.insert(ta.clock_index(r.get<std::string>()));
    if (!edge.guard_text.empty()) edge.guard = parse_guard(edge.guard_text, ta);
    ta.edges.push_back(std::move(edge));
  }
  for (const auto& s : doc.value("accepting", nlohmann::ordered_json::array()))
    ta.accepting.insert(ta.location_index(s.get<std::string>()));
  for (const auto& s : doc.value("initial", nlohmann::ordered_json::array()))
    ta.initial.push_back(ta.location_index(s.get<std::string>()));
  return ta;
}

// ---------------------------------------------------------------------------
// Compilation to a finite timed system (Def-2.5 semantics, discrete time).
// ---------------------------------------------------------------------------

struct CompileOptions {
  int64_t t_max = 3;
  size_t state_limit = 20000;
};

namespace detail {

inline std::string config_name(const TimedAutomaton& ta, int loc, const Valuation& v) {
  std::string name = ta.locations[static_cast<size_t>(loc)];
  if (ta.clocks.empty()) return name;
  name += "[";
  for (size_t c = 0; c < ta.clocks.size(); ++c) {
    if (c) name += ",";
    name += ta.clocks[c] + "=" + std::to_string(v[c]);
  }
  return name + "]";
}

}  // namespace detail

inline TimedSystem compile(const TimedAutomaton& ta, const CompileOptions& opt = {}) {
  if (opt.t_max < 0) throw ValidationError("t_max must be non-negative");
  const int64_t cap = ta.clock_cap();
  std::vector<int> seeds = ta.initial;
  if (seeds.empty())
    for (size_t l = 0; l < ta.locations.size(); ++l) seeds.push_back(static_cast<int>(l));

  using Config = std::pair<int, Valuation>;
  std::map<Config, int> ids;
  std::vector<Config> configs;
  std::deque<int> queue;
  auto intern = [&](const Config& c) {
    auto it = ids.find(c);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(configs.size());
    if (configs.size() >= opt.state_limit)
      throw BudgetError("state limit exceeded at " + std::to_string(configs.size()) +
                        " configurations");
    ids.emplace(c, id);
    configs.push_back(c);
    queue.push_back(id);
    return id;
  };

  Valuation zeros(ta.clocks.size(), 0);
  for (int l : seeds) intern({l, zeros});

  struct Transition {
    int from, label, to;
    int64_t t;
  };
  std::vector<Transition> transitions;
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    const auto [loc, v] = configs[static_cast<size_t>(id)];
    for (int64_t t = 0; t <= opt.t_max; ++t) {
      Valuation advanced = advance_reset(v, t, {}, cap);
      for (const auto& e : ta.edges) {
        if (e.from != loc) continue;
        if (e.guard && !eval_guard(*e.guard, advanced)) continue;
        Valuation next = advanced;
        for (int c : e.resets) next[static_cast<size_t>(c)] = 0;
        int to = intern({e.to, next});
        transitions.push_back({id, e.label + 1, to, t});
      }
    }
  }

  TimedSystem sys;
  sys.backend = Backend::NonDet;
  sys.base = ScalarQuantale(ScalarKind::Bool);
  sys.alphabet = ta.alphabet;
  for (const auto& [loc, v] : configs) sys.states.push_back(detail::config_name(ta, loc, v));
  for (int64_t t = 0; t <= opt.t_max; ++t) sys.durations.push_back(t);
  for (int64_t t : sys.durations)
    sys.step.emplace(t, EffectEndo::bottom(sys.backend, sys.base, sys.n_states(),
                                           sys.n_labels()));
  for (const auto& tr : transitions)
    sys.step.at(tr.t).set_step(tr.from, tr.label, tr.to, sys.base.one());
  for (size_t id = 0; id < configs.size(); ++id)
    if (ta.accepting.count(configs[id].first)) {
      sys.step.at(0).set_accept(static_cast<int>(id), sys.base.one());
      sys.has_accept = true;
    }
  return sys;
}

}  // namespace timedeq
