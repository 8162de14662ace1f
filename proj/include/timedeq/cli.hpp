#pragma once

// Command-line surface. Exit codes: 0 success/equivalent, 1 inequivalent or
// a failed report, 2 usage/validation errors, 3 bounded-inconclusive.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "timedeq/equivalence.hpp"
#include "timedeq/markov.hpp"
#include "timedeq/oracles.hpp"
#include "timedeq/saturation.hpp"
#include "timedeq/systems.hpp"
#include "timedeq/timed_automata.hpp"

namespace timedeq::cli {

namespace detail {

inline Json read_json(const std::string& path) {
  Json doc;
  if (path == "-") {
    try {
      std::cin >> doc;
    } catch (const std::exception& e) {
      throw ValidationError(std::string("stdin: JSON parse error: ") + e.what());
    }
    return doc;
  }
  std::ifstream in(path);
  if (!in.good()) throw ValidationError("cannot open '" + path + "'");
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ValidationError(path + ": JSON parse error: " + e.what());
  }
  return doc;
}

inline uint64_t default_seed() {
  if (const char* env = std::getenv("TIMEDEQ_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

inline std::string partition_text(const Partition& p, const std::vector<std::string>& names) {
  std::string out;
  for (const auto& blk : p.blocks()) {
    out += "{";
    for (size_t i = 0; i < blk.size(); ++i) {
      if (i) out += ",";
      out += names[static_cast<size_t>(blk[i])];
    }
    out += "} ";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

inline Json partition_json(const Partition& p, const std::vector<std::string>& names) {
  Json blocks = Json::array();
  for (const auto& blk : p.blocks()) {
    Json b = Json::array();
    for (int s : blk) b.push_back(names[static_cast<size_t>(s)]);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

// The saturated family rendered back as a system file: durations become the
// materialized indices. Weak-timed families expose the rule-based saturated
// accepts as the accepting data.
inline TimedSystem family_as_system(const SaturatedFamily& fam) {
  TimedSystem out;
  const TimedSystem& src = fam.source;
  out.backend = src.backend;
  out.base = src.base;
  out.quantale_key = src.quantale_key;
  out.states = src.states;
  out.alphabet = src.alphabet;
  out.has_accept = src.has_accept;
  int64_t counter = 0;
  for (size_t i = 0; i < fam.index.size(); ++i) {
    int64_t key;
    switch (fam.hom) {
      case CanonicalHom::StrongTimed:
        if (fam.index[i].word.empty()) continue;  // skip the unit member
        key = fam.index[i].word[0];
        break;
      case CanonicalHom::WeakTimed: key = fam.index[i].nat; break;
      case CanonicalHom::StrongAbstract:
        key = static_cast<int64_t>(fam.index[i].word.size());
        break;
      case CanonicalHom::WeakAbstract: key = counter++; break;
    }
    out.durations.push_back(key);
    EffectEndo stage = fam.member[i];
    if (fam.has_rule_accept() && stage.is_matrix()) stage.acc = fam.rule_accept[i];
    out.step.emplace(key, std::move(stage));
  }
  return out;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"timedeq: behavioural equivalences for finite timed systems"};
  app.require_subcommand(1);

  std::string format = "table";

  // ta compile
  auto* ta_cmd = app.add_subcommand("ta", "timed-automaton commands");
  ta_cmd->require_subcommand(1);
  auto* ta_compile = ta_cmd->add_subcommand("compile", "compile to a system file");
  std::string ta_path;
  int64_t ta_t_max = 3;
  size_t ta_state_limit = 20000;
  std::vector<std::string> ta_initial;
  ta_compile->add_option("file", ta_path, "automaton JSON")->required();
  ta_compile->add_option("--t-max", ta_t_max, "maximum step duration");
  ta_compile->add_option("--state-limit", ta_state_limit, "configuration budget");
  ta_compile->add_option("--initial", ta_initial, "initial location (repeatable)");

  // saturate
  auto* sat_cmd = app.add_subcommand("saturate", "compute a saturated family");
  std::string sat_hom = "weak";
  std::string sat_path;
  int64_t sat_t_max = -1;
  int sat_depth = -1;
  bool sat_dot = false;
  sat_cmd->add_option("--hom", sat_hom, "id|weak|abstract|weak-abstract");
  sat_cmd->add_option("--t-max", sat_t_max, "materialization bound for weak-timed");
  sat_cmd->add_option("--depth", sat_depth, "power/stage bound");
  sat_cmd->add_flag("--dot", sat_dot, "emit graphviz instead of a system file");
  sat_cmd->add_option("file", sat_path, "system JSON")->required();

  // check
  auto* check_cmd = app.add_subcommand("check", "decide one equivalence");
  std::string check_relation = "strong-timed";
  std::string check_semantics = "bisim";
  std::vector<std::string> check_pair;
  std::string check_path;
  int64_t check_t_max = -1;
  int check_len = 3;
  int64_t check_time = 4;
  check_cmd->add_option("--relation", check_relation,
                        "strong-timed|weak-timed|strong-abstract|weak-abstract");
  check_cmd->add_option("--semantics", check_semantics, "bisim|lang");
  check_cmd->add_option("--pair", check_pair, "two state names")->expected(2);
  check_cmd->add_option("--t-max", check_t_max, "weak-timed bound");
  check_cmd->add_option("--len", check_len, "language length bound");
  check_cmd->add_option("--time", check_time, "language time bound");
  check_cmd->add_option("--format", format, "table|json");
  check_cmd->add_option("file", check_path, "system JSON")->required();

  // spectrum
  auto* spec_cmd = app.add_subcommand("spectrum", "the eight-relation table");
  std::string spec_path;
  int64_t spec_t_max = -1;
  int spec_len = 3;
  int64_t spec_time = 4;
  spec_cmd->add_option("--t-max", spec_t_max, "weak-timed bound");
  spec_cmd->add_option("--len", spec_len, "language length bound");
  spec_cmd->add_option("--time", spec_time, "language time bound");
  spec_cmd->add_option("--format", format, "table|json");
  spec_cmd->add_option("file", spec_path, "system JSON")->required();

  // mc lump
  auto* mc_cmd = app.add_subcommand("mc", "Markov-chain commands");
  mc_cmd->require_subcommand(1);
  auto* mc_lump = mc_cmd->add_subcommand("lump", "coarsest hitting-probability lumping");
  std::string mc_path;
  double mc_tol = 1e-9;
  bool mc_exact = false;
  mc_lump->add_option("file", mc_path, "chain JSON")->required();
  mc_lump->add_option("--tol", mc_tol, "float-mode tolerance");
  mc_lump->add_flag("--exact", mc_exact, "exact rational mode");

  // export-dot
  auto* dot_cmd = app.add_subcommand("export-dot", "render a system file as graphviz");
  std::string dot_path;
  dot_cmd->add_option("file", dot_path, "system JSON")->required();

  // oracle group
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force reference tools");
  oracle_cmd->require_subcommand(1);

  auto* o_weak = oracle_cmd->add_subcommand("weak-steps", "rule closure of saturated steps");
  std::string o_weak_path;
  int64_t o_weak_t_max = 4;
  o_weak->add_option("file", o_weak_path)->required();
  o_weak->add_option("--t-max", o_weak_t_max);

  auto* o_wweak = oracle_cmd->add_subcommand("weighted-weak", "literal weighted recursion");
  std::string o_wweak_path;
  int64_t o_wweak_t_max = 4;
  int o_wweak_depth = 8;
  o_wweak->add_option("file", o_wweak_path)->required();
  o_wweak->add_option("--t-max", o_wweak_t_max);
  o_wweak->add_option("--depth", o_wweak_depth);

  auto* o_cweak = oracle_cmd->add_subcommand("convex-weak", "literal convex recursion");
  std::string o_cweak_path;
  int64_t o_cweak_t_max = 2;
  int o_cweak_depth = 8;
  o_cweak->add_option("file", o_cweak_path)->required();
  o_cweak->add_option("--t-max", o_cweak_t_max);
  o_cweak->add_option("--depth", o_cweak_depth);

  auto* o_lang = oracle_cmd->add_subcommand("languages", "path-walked language sample");
  std::string o_lang_path, o_lang_state, o_lang_mode = "tl";
  int o_lang_len = 3;
  int64_t o_lang_time = 4;
  o_lang->add_option("file", o_lang_path)->required();
  o_lang->add_option("--state", o_lang_state)->required();
  o_lang->add_option("--mode", o_lang_mode, "tl|utl|wtl|wutl");
  o_lang->add_option("--len", o_lang_len);
  o_lang->add_option("--time", o_lang_time);

  auto* o_mc = oracle_cmd->add_subcommand("mc-hit", "Monte-Carlo hitting estimate");
  std::string o_mc_path, o_mc_start;
  std::vector<std::string> o_mc_targets;
  size_t o_mc_trials = 10000;
  int o_mc_horizon = 60;
  uint64_t o_mc_seed = detail::default_seed();
  o_mc->add_option("file", o_mc_path)->required();
  o_mc->add_option("--start", o_mc_start)->required();
  o_mc->add_option("--target", o_mc_targets, "target state (repeatable)")->required();
  o_mc->add_option("--trials", o_mc_trials);
  o_mc->add_option("--horizon", o_mc_horizon);
  o_mc->add_option("--seed", o_mc_seed);

  auto* o_q = oracle_cmd->add_subcommand("quantale", "law harness for a built-in quantale");
  std::string o_q_key;
  size_t o_q_samples = 1000;
  uint64_t o_q_seed = detail::default_seed();
  o_q->add_option("key", o_q_key, "bool|nat-inf-max-plus|unit-min-times|label")->required();
  o_q->add_option("--samples", o_q_samples);
  o_q->add_option("--seed", o_q_seed);

  try {
    std::vector<const char*> argv;
    argv.push_back("timedeq");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ta_compile->parsed()) {
      auto ta = parse_automaton(detail::read_json(ta_path));
      for (const auto& l : ta_initial) ta.initial.push_back(ta.location_index(l));
      CompileOptions opt;
      opt.t_max = ta_t_max;
      opt.state_limit = ta_state_limit;
      out << serialize(compile(ta, opt)).dump(2) << "\n";
      return 0;
    }

    if (sat_cmd->parsed()) {
      auto sys = load_system(detail::read_json(sat_path));
      SaturationBounds bounds;
      bounds.t_max = sat_t_max;
      bounds.depth = sat_depth;
      auto fam = saturate(sys, hom_by_key(sat_hom), bounds);
      auto rendered = detail::family_as_system(fam);
      if (sat_dot) {
        out << dump_dot(rendered);
      } else {
        Json doc = serialize(rendered);
        doc["saturation"] = {{"hom", hom_name(fam.hom)},
                             {"t_max", fam.bounds.t_max},
                             {"depth", fam.bounds.depth},
                             {"exact", fam.exact}};
        out << doc.dump(2) << "\n";
      }
      return fam.exact ? 0 : 3;
    }

    if (check_cmd->parsed()) {
      auto sys = load_system(detail::read_json(check_path));
      CanonicalHom hom = hom_by_key(check_relation);
      LangBound lb{check_len, check_time};
      if (check_semantics == "bisim") {
        SaturationBounds bounds;
        bounds.t_max = check_t_max;
        auto fam = saturate(sys, hom, bounds);
        auto res = coarsest_bisimulation(fam);
        if (!check_pair.empty()) {
          int x = sys.state_index(check_pair[0]);
          int y = sys.state_index(check_pair[1]);
          bool same = res.partition.same_block(x, y);
          std::string verdict = same ? (res.exact ? "equivalent" : "bounded-equivalent")
                                     : (res.exact ? "inequivalent" : "bounded-inequivalent");
          if (format == "json") {
            Json doc = {{"relation", check_relation},
                        {"semantics", "bisim"},
                        {"pair", {check_pair[0], check_pair[1]}},
                        {"verdict", verdict}};
            out << doc.dump(2) << "\n";
          } else {
            out << verdict << "\n";
          }
          if (!res.exact) return 3;
          return same ? 0 : 1;
        }
        if (format == "json") {
          Json doc = {{"relation", check_relation},
                      {"semantics", "bisim"},
                      {"exact", res.exact},
                      {"partition", detail::partition_json(res.partition, sys.states)}};
          out << doc.dump(2) << "\n";
        } else {
          out << detail::partition_text(res.partition, sys.states) << "\n";
        }
        return res.exact ? 0 : 3;
      }
      if (check_semantics != "lang")
        throw ValidationError("semantics must be bisim or lang");
      LangMode mode = hom == CanonicalHom::StrongTimed     ? LangMode::TL
                      : hom == CanonicalHom::WeakTimed     ? LangMode::WTL
                      : hom == CanonicalHom::StrongAbstract ? LangMode::UTL
                                                            : LangMode::WUTL;
      if (!check_pair.empty()) {
        int x = sys.state_index(check_pair[0]);
        int y = sys.state_index(check_pair[1]);
        auto v = language_equivalent(sys, x, y, mode, lb);
        std::string verdict = v.kind == LangVerdict::Kind::Equal ? "equal"
                              : v.kind == LangVerdict::Kind::BoundedEqual
                                  ? "bounded-equal"
                                  : "distinguished";
        std::string witness =
            v.witness ? format_word(*v.witness, [&](int l) { return sys.label_name(l); })
                      : "";
        if (format == "json") {
          Json doc = {{"relation", check_relation},
                      {"semantics", "lang"},
                      {"mode", lang_mode_name(mode)},
                      {"pair", {check_pair[0], check_pair[1]}},
                      {"verdict", verdict}};
          if (v.witness) doc["witness"] = witness;
          out << doc.dump(2) << "\n";
        } else {
          out << verdict;
          if (v.witness) out << " by " << witness;
          out << "\n";
        }
        if (v.kind == LangVerdict::Kind::Equal) return 0;
        if (v.kind == LangVerdict::Kind::Distinguished) return 1;
        return 3;
      }
      bool exact = true;
      auto part = language_partition(sys, mode, lb, exact);
      if (format == "json") {
        Json doc = {{"relation", check_relation},
                    {"semantics", "lang"},
                    {"mode", lang_mode_name(mode)},
                    {"exact", exact},
                    {"partition", detail::partition_json(part, sys.states)}};
        out << doc.dump(2) << "\n";
      } else {
        out << detail::partition_text(part, sys.states) << "\n";
      }
      return exact ? 0 : 3;
    }

    if (spec_cmd->parsed()) {
      auto sys = load_system(detail::read_json(spec_path));
      SaturationBounds bounds;
      bounds.t_max = spec_t_max;
      auto res = spectrum(sys, bounds, {spec_len, spec_time});
      if (format == "json") {
        Json doc;
        Json rows = Json::array();
        for (const auto& row : res.rows) {
          Json r = {{"relation", row.name},
                    {"present", row.present},
                    {"exact", row.exact},
                    {"note", row.note}};
          if (row.present) r["partition"] = detail::partition_json(row.partition, sys.states);
          rows.push_back(std::move(r));
        }
        doc["rows"] = std::move(rows);
        Json edges = Json::array();
        for (const auto& e : res.hasse)
          edges.push_back({{"finer", e.finer},
                           {"coarser", e.coarser},
                           {"checked", e.checked},
                           {"holds", e.holds}});
        doc["hasse"] = std::move(edges);
        doc["all_edges_hold"] = res.all_edges_hold;
        out << doc.dump(2) << "\n";
      } else {
        for (const auto& row : res.rows) {
          out << row.name << ": ";
          if (!row.present) {
            out << "(" << row.note << ")";
          } else {
            out << detail::partition_text(row.partition, sys.states);
            if (!row.note.empty()) out << "  [" << row.note << "]";
          }
          out << "\n";
        }
        for (const auto& e : res.hasse) {
          out << "edge " << e.finer << " -> " << e.coarser << ": "
              << (!e.checked ? "skipped" : e.holds ? "holds" : "VIOLATED") << "\n";
        }
        out << (res.all_edges_hold ? "hasse: all-pass" : "hasse: violations") << "\n";
      }
      return res.all_edges_hold ? 0 : 1;
    }

    if (mc_lump->parsed()) {
      auto chain = load_chain(detail::read_json(mc_path));
      auto part = coarsest_lumping(chain, mc_exact, mc_tol);
      out << detail::partition_text(part, chain.states) << "\n";
      return 0;
    }

    if (dot_cmd->parsed()) {
      auto sys = load_system(detail::read_json(dot_path));
      out << dump_dot(sys);
      return 0;
    }

    if (o_weak->parsed()) {
      auto sys = load_system(detail::read_json(o_weak_path));
      auto closure = rule_closure_weak_steps(sys, o_weak_t_max);
      for (const auto& [x, l, t, y] : closure.steps)
        out << sys.states[static_cast<size_t>(x)] << " =(" << sys.label_name(l) << ","
            << t << ")=> " << sys.states[static_cast<size_t>(y)] << "\n";
      for (const auto& [x, t] : closure.accepts)
        out << sys.states[static_cast<size_t>(x)] << " =(" << t << ")=> ok\n";
      return 0;
    }

    if (o_wweak->parsed()) {
      auto sys = load_system(detail::read_json(o_wweak_path));
      auto table = brute_weighted_weak(sys, o_wweak_t_max, o_wweak_depth);
      for (int64_t t = 0; t <= o_wweak_t_max; ++t)
        for (int x = 0; x < table.n; ++x)
          for (int y = 0; y < table.n; ++y)
            for (int l = 0; l < static_cast<int>(table.at(t, x, y).w.size()); ++l)
              if (!table.at(t, x, y).w[static_cast<size_t>(l)].is_bot())
                out << sys.states[static_cast<size_t>(x)] << " =(" << sys.label_name(l)
                    << "," << t << ")=> " << sys.states[static_cast<size_t>(y)] << " : "
                    << sys.base.format(table.at(t, x, y).w[static_cast<size_t>(l)])
                    << "\n";
      out << (table.stabilized ? "stabilized" : "not stabilized (depth "
                                                    + std::to_string(o_wweak_depth) + ")")
          << "\n";
      return table.stabilized ? 0 : 3;
    }

    if (o_cweak->parsed()) {
      auto sys = load_system(detail::read_json(o_cweak_path));
      auto table = brute_convex_weak(sys, o_cweak_t_max, o_cweak_depth);
      for (int64_t t = 0; t <= o_cweak_t_max; ++t)
        for (int x = 0; x < sys.n_states(); ++x) {
          const auto& cell = table.gens[static_cast<size_t>(t)][static_cast<size_t>(x)];
          if (cell.empty()) continue;
          out << sys.states[static_cast<size_t>(x)] << " @" << t << ":";
          for (const auto& g : cell) {
            out << " {";
            bool first = true;
            for (const auto& [l, y, w] : g.mass) {
              if (!first) out << " + ";
              out << format_rat(w) << "(" << sys.label_name(l) << ","
                  << sys.states[static_cast<size_t>(y)] << ")";
              first = false;
            }
            if (g.accept != 0) out << (first ? "" : " + ") << format_rat(g.accept) << "(ok)";
            out << "}";
          }
          out << "\n";
        }
      return table.stabilized ? 0 : 3;
    }

    if (o_lang->parsed()) {
      auto sys = load_system(detail::read_json(o_lang_path));
      auto words = brute_languages(sys, sys.state_index(o_lang_state),
                                   lang_mode_by_key(o_lang_mode),
                                   {o_lang_len, o_lang_time});
      for (const auto& [w, weight] : words) {
        out << format_word(w, [&](int l) { return sys.label_name(l); });
        if (sys.backend == Backend::QWeighted) out << " : " << sys.base.format(weight);
        out << "\n";
      }
      return 0;
    }

    if (o_mc->parsed()) {
      auto chain = load_chain(detail::read_json(o_mc_path));
      std::set<int> targets;
      for (const auto& t : o_mc_targets) targets.insert(chain.state_index(t));
      auto est = monte_carlo_hitting(chain, chain.state_index(o_mc_start), targets,
                                     o_mc_trials, o_mc_horizon, o_mc_seed);
      out << "estimate " << est.estimate << " wilson95 [" << est.lo << ", " << est.hi
          << "] hits " << est.hits << "/" << est.trials << "\n";
      return 0;
    }

    if (o_q->parsed()) {
      StarQuantale q = o_q_key == "label" ? StarQuantale::label({"sigma", "theta"})
                                          : StarQuantale::by_key(o_q_key);
      auto report = verify_quantale(q, o_q_samples, o_q_seed);
      for (const auto& e : report.entries)
        out << (e.pass ? "pass" : "FAIL") << "  " << e.law
            << (e.pass ? "" : "  [" + e.counterexample + "]") << "\n";
      return report.all_pass() ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace timedeq::cli
