#pragma once

// The finite timed-system data model and its file format. A TimedSystem is a
// duration-indexed family of effect endomorphisms over a shared carrier;
// values on duration words are always derived by composition, never stored.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "timedeq/effects.hpp"

namespace timedeq {

using Json = nlohmann::ordered_json;

struct TimedSystem {
  Backend backend = Backend::NonDet;
  ScalarQuantale base;              // Bool unless QWeighted
  std::string quantale_key = "bool";
  std::vector<std::string> states;
  std::vector<std::string> alphabet;  // visible labels; tau is implicit
  std::vector<int64_t> durations;     // sorted, non-empty
  std::map<int64_t, EffectEndo> step;
  bool has_accept = false;

  int n_states() const { return static_cast<int>(states.size()); }
  int n_labels() const { return static_cast<int>(alphabet.size()); }

  int state_index(const std::string& name) const {
    for (size_t i = 0; i < states.size(); ++i)
      if (states[i] == name) return static_cast<int>(i);
    throw ValidationError("unknown state '" + name + "'");
  }

  // 0 = tau, 1.. = alphabet order
  int label_index(const std::string& name) const {
    if (name == "tau") return 0;
    for (size_t i = 0; i < alphabet.size(); ++i)
      if (alphabet[i] == name) return static_cast<int>(i) + 1;
    throw ValidationError("unknown label '" + name + "'");
  }

  std::string label_name(int l) const { return l == 0 ? "tau" : alphabet[l - 1]; }

  bool has_duration(int64_t t) const {
    return std::binary_search(durations.begin(), durations.end(), t);
  }

  // Step at duration t; durations outside D have the bottom endomorphism.
  EffectEndo step_at(int64_t t) const {
    auto it = step.find(t);
    if (it != step.end()) return it->second;
    return EffectEndo::bottom(backend, base, n_states(), n_labels());
  }

  int64_t max_duration() const { return durations.empty() ? 0 : durations.back(); }
};

namespace detail {

inline Scalar parse_weight(const ScalarQuantale& q, const Json& j, const std::string& where) {
  if (j.is_string()) return q.parse(j.get<std::string>());
  if (j.is_number_integer()) return q.parse(std::to_string(j.get<int64_t>()));
  throw ValidationError(where + ": weight must be a string or integer");
}

inline Rat parse_rat_field(const Json& j, const std::string& where) {
  if (j.is_string()) return parse_rat(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<int64_t>());
  throw ValidationError(where + ": expected an exact rational");
}

}  // namespace detail

inline TimedSystem load_system(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("system document must be a JSON object");
  TimedSystem sys;

  std::string backend = doc.value("backend", "nondet");
  if (backend == "nondet") {
    sys.backend = Backend::NonDet;
  } else if (backend == "weighted") {
    sys.backend = Backend::QWeighted;
  } else if (backend == "convex") {
    sys.backend = Backend::Convex;
  } else {
    throw ValidationError("unknown backend '" + backend + "'");
  }

  if (sys.backend == Backend::QWeighted) {
    if (!doc.contains("quantale"))
      throw ValidationError("weighted systems must name a quantale");
    sys.quantale_key = doc.at("quantale").get<std::string>();
    sys.base = StarQuantale::by_key(sys.quantale_key).base();
  } else {
    if (doc.contains("quantale") && doc.at("quantale").get<std::string>() != "bool")
      throw ValidationError("only weighted systems may pick a quantale");
    sys.quantale_key = "bool";
    sys.base = ScalarQuantale(ScalarKind::Bool);
  }

  if (!doc.contains("states") || !doc.at("states").is_array() || doc.at("states").empty())
    throw ValidationError("states: need a non-empty array");
  for (const auto& s : doc.at("states")) {
    std::string name = s.get<std::string>();
    if (std::find(sys.states.begin(), sys.states.end(), name) != sys.states.end())
      throw ValidationError("duplicate state '" + name + "'");
    sys.states.push_back(std::move(name));
  }

  for (const auto& s : doc.value("alphabet", Json::array())) {
    std::string name = s.get<std::string>();
    if (name == "tau") throw ValidationError("alphabet: 'tau' is reserved");
    if (std::find(sys.alphabet.begin(), sys.alphabet.end(), name) != sys.alphabet.end())
      throw ValidationError("duplicate label '" + name + "'");
    sys.alphabet.push_back(std::move(name));
  }

  if (!doc.contains("durations") || doc.at("durations").empty())
    throw ValidationError("durations: need a non-empty array");
  for (const auto& d : doc.at("durations")) {
    int64_t t = d.get<int64_t>();
    if (t < 0) throw ValidationError("durations must be naturals");
    sys.durations.push_back(t);
  }
  std::sort(sys.durations.begin(), sys.durations.end());
  sys.durations.erase(std::unique(sys.durations.begin(), sys.durations.end()),
                      sys.durations.end());

  for (int64_t t : sys.durations)
    sys.step.emplace(t, EffectEndo::bottom(sys.backend, sys.base, sys.n_states(),
                                           sys.n_labels()));

  auto duration_of = [&](const Json& j, const std::string& where) {
    int64_t t = j.get<int64_t>();
    if (!sys.has_duration(t))
      throw ValidationError(where + ": duration " + std::to_string(t) + " not declared");
    return t;
  };

  size_t idx = 0;
  for (const auto& e : doc.value("steps", Json::array())) {
    std::string where = "steps[" + std::to_string(idx++) + "]";
    if (sys.backend == Backend::Convex)
      throw ValidationError(where + ": convex systems use convex_steps");
    int from = sys.state_index(e.at("from").get<std::string>());
    int to = sys.state_index(e.at("to").get<std::string>());
    int label = sys.label_index(e.at("label").get<std::string>());
    int64_t t = duration_of(e.at("dur"), where);
    Scalar w = e.contains("weight")
                   ? detail::parse_weight(sys.base, e.at("weight"), where)
                   : sys.base.one();
    if (w.is_bot()) throw ValidationError(where + ": a step cannot carry weight bottom");
    auto& endo = sys.step.at(t);
    endo.set_step(from, label, to, sys.base.join(endo.at(from, to).w[label], w));
  }

  idx = 0;
  for (const auto& e : doc.value("convex_steps", Json::array())) {
    std::string where = "convex_steps[" + std::to_string(idx++) + "]";
    if (sys.backend != Backend::Convex)
      throw ValidationError(where + ": convex_steps need the convex backend");
    int from = sys.state_index(e.at("from").get<std::string>());
    int64_t t = duration_of(e.at("dur"), where);
    for (const auto& gj : e.at("generators")) {
      DistGenerator g;
      for (const auto& mj : gj.value("mass", Json::array())) {
        int label = sys.label_index(mj.at("label").get<std::string>());
        int to = sys.state_index(mj.at("to").get<std::string>());
        Rat w = detail::parse_rat_field(mj.at("weight"), where);
        if (w < 0) throw ValidationError(where + ": negative generator weight");
        g.add(label, to, w);
      }
      if (gj.contains("accept")) {
        g.accept = detail::parse_rat_field(gj.at("accept"), where);
        if (g.accept < 0) throw ValidationError(where + ": negative accept weight");
        if (g.accept > 0) sys.has_accept = true;
      }
      g.normalize();
      if (g.total() > 1)
        throw ValidationError(where + ": generator mass exceeds one");
      sys.step.at(t).gens[from].push_back(std::move(g));
    }
  }
  if (sys.backend == Backend::Convex) {
    for (auto& [t, endo] : sys.step)
      for (auto& row : endo.gens)
        if (!row.empty()) row = canonicalize_convex(std::move(row));
  }

  idx = 0;
  for (const auto& a : doc.value("accepting", Json::array())) {
    std::string where = "accepting[" + std::to_string(idx++) + "]";
    std::string name;
    int64_t t = 0;
    Scalar w = sys.base.one();
    if (a.is_string()) {
      name = a.get<std::string>();
      if (!sys.has_duration(0))
        throw ValidationError(where + ": short form needs duration 0 declared");
    } else {
      name = a.at("state").get<std::string>();
      t = duration_of(a.value("dur", Json(0)), where);
      if (a.contains("weight")) w = detail::parse_weight(sys.base, a.at("weight"), where);
    }
    int x = sys.state_index(name);
    if (sys.backend == Backend::Convex) {
      DistGenerator g;
      g.accept = 1;
      auto& row = sys.step.at(t).gens[x];
      row.push_back(std::move(g));
      row = canonicalize_convex(std::move(row));
    } else {
      if (w.is_bot()) throw ValidationError(where + ": accept weight cannot be bottom");
      auto& endo = sys.step.at(t);
      endo.set_accept(x, sys.base.join(endo.acc[x], w));
    }
    sys.has_accept = true;
  }

  return sys;
}

inline TimedSystem load_system_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("JSON parse error: ") + e.what());
  }
  return load_system(doc);
}

inline Json serialize(const TimedSystem& sys) {
  Json doc;
  doc["backend"] = backend_name(sys.backend);
  if (sys.backend == Backend::QWeighted) doc["quantale"] = sys.quantale_key;
  doc["alphabet"] = sys.alphabet;
  doc["durations"] = sys.durations;
  doc["states"] = sys.states;

  Json accepting = Json::array();
  Json steps = Json::array();
  Json convex_steps = Json::array();
  for (int64_t t : sys.durations) {
    const EffectEndo& e = sys.step.at(t);
    if (e.is_matrix()) {
      for (int x = 0; x < sys.n_states(); ++x) {
        for (int y = 0; y < sys.n_states(); ++y)
          for (int l = 0; l <= sys.n_labels(); ++l) {
            const Scalar& w = e.at(x, y).w[l];
            if (w.is_bot()) continue;
            Json s;
            s["from"] = sys.states[x];
            s["label"] = sys.label_name(l);
            s["dur"] = t;
            s["to"] = sys.states[y];
            if (sys.backend == Backend::QWeighted) s["weight"] = sys.base.format(w);
            steps.push_back(std::move(s));
          }
        if (!e.acc[x].is_bot()) {
          Json a;
          a["state"] = sys.states[x];
          a["dur"] = t;
          if (sys.backend == Backend::QWeighted) a["weight"] = sys.base.format(e.acc[x]);
          accepting.push_back(std::move(a));
        }
      }
    } else {
      for (int x = 0; x < sys.n_states(); ++x) {
        if (e.gens[x].empty()) continue;
        Json entry;
        entry["from"] = sys.states[x];
        entry["dur"] = t;
        Json gens = Json::array();
        for (const auto& g : e.gens[x]) {
          Json gj;
          Json mass = Json::array();
          for (const auto& [l, s, w] : g.mass) {
            Json mj;
            mj["label"] = sys.label_name(l);
            mj["to"] = sys.states[s];
            mj["weight"] = format_rat(w);
            mass.push_back(std::move(mj));
          }
          gj["mass"] = std::move(mass);
          if (g.accept != 0) gj["accept"] = format_rat(g.accept);
          gens.push_back(std::move(gj));
        }
        entry["generators"] = std::move(gens);
        convex_steps.push_back(std::move(entry));
      }
    }
  }
  if (!accepting.empty()) doc["accepting"] = std::move(accepting);
  if (sys.backend == Backend::Convex) {
    doc["convex_steps"] = std::move(convex_steps);
  } else {
    doc["steps"] = std::move(steps);
  }
  return doc;
}

// pi_{t1...tk} = pi_{t1} o ... o pi_{tk}: the fold of composition over the
// word, in temporal order; the empty word is the identity.
inline EffectEndo word_step(const TimedSystem& sys, std::span<const int64_t> word) {
  for (int64_t t : word)
    if (!sys.has_duration(t))
      throw UnknownDuration("duration " + std::to_string(t) + " not in D");
  EffectEndo acc = EffectEndo::identity(sys.backend, sys.base, sys.n_states(),
                                        sys.n_labels());
  for (int64_t t : word) acc = compose(acc, sys.step_at(t));
  return acc;
}

inline EffectEndo word_step(const TimedSystem& sys, std::initializer_list<int64_t> word) {
  return word_step(sys, std::span<const int64_t>(word.begin(), word.size()));
}

struct DotOptions {
  std::string graph_name = "timedeq";
  bool rankdir_lr = true;
};

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

// Graphviz rendering. Edges are labelled "sigma,t" (with "| w" appended on
// weighted backends); states accepting at any duration are double-circled.
inline std::string dump_dot(const TimedSystem& sys, const DotOptions& opt = {}) {
  std::ostringstream out;
  out << "digraph \"" << detail::dot_escape(opt.graph_name) << "\" {\n";
  if (opt.rankdir_lr) out << "  rankdir=LR;\n";
  out << "  node [shape=circle];\n";
  std::set<int> accepting;
  for (const auto& [t, e] : sys.step) {
    if (e.is_matrix()) {
      for (int x = 0; x < sys.n_states(); ++x)
        if (!e.acc[x].is_bot()) accepting.insert(x);
    } else {
      for (int x = 0; x < sys.n_states(); ++x)
        for (const auto& g : e.gens[x])
          if (g.accept != 0) accepting.insert(x);
    }
  }
  for (int x = 0; x < sys.n_states(); ++x) {
    out << "  \"" << detail::dot_escape(sys.states[x]) << "\"";
    if (accepting.count(x)) out << " [peripheries=2]";
    out << ";\n";
  }
  for (const auto& [t, e] : sys.step) {
    if (e.is_matrix()) {
      for (int x = 0; x < sys.n_states(); ++x)
        for (int y = 0; y < sys.n_states(); ++y)
          for (int l = 0; l <= sys.n_labels(); ++l) {
            const Scalar& w = e.at(x, y).w[l];
            if (w.is_bot()) continue;
            out << "  \"" << detail::dot_escape(sys.states[x]) << "\" -> \""
                << detail::dot_escape(sys.states[y]) << "\" [label=\""
                << sys.label_name(l) << "," << t;
            if (sys.backend == Backend::QWeighted) out << " | " << sys.base.format(w);
            out << "\"];\n";
          }
    } else {
      for (int x = 0; x < sys.n_states(); ++x)
        for (size_t gi = 0; gi < e.gens[x].size(); ++gi) {
          for (const auto& [l, y, w] : e.gens[x][gi].mass)
            out << "  \"" << detail::dot_escape(sys.states[x]) << "\" -> \""
                << detail::dot_escape(sys.states[y]) << "\" [label=\""
                << sys.label_name(l) << "," << t << " | " << format_rat(w) << " (g"
                << gi << ")\"];\n";
        }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace timedeq
