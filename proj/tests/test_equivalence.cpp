#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "helpers.hpp"
#include "timedeq/equivalence.hpp"
#include "timedeq/oracles.hpp"

using namespace timedeq;
using namespace timedeq::testing;

namespace {

TimedSystem fixture(const std::string& name) {
  std::ifstream in(std::string(TIMEDEQ_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  Json j;
  in >> j;
  return load_system(j);
}

TimedWord make_word(std::vector<int64_t> durs, std::vector<int> labels) {
  TimedWord w;
  w.durations = std::move(durs);
  w.labels = std::move(labels);
  return w;
}

}  // namespace

TEST_CASE("strong bisimulation separates the running example") {
  // s0 has a sigma step, s1 does not, s2 has the theta loop
  auto sys = fixture("fig2.json");
  auto fam = saturate(sys, CanonicalHom::StrongTimed);
  auto res = coarsest_bisimulation(fam);
  REQUIRE(res.partition == Partition::discrete(3));
  REQUIRE(res.exact);
}

TEST_CASE("isomorphic disjoint copies are merged pairwise") {
  std::mt19937_64 rng(654);
  for (int trial = 0; trial < 8; ++trial) {
    SystemOptions opt;
    opt.n_states = 3;
    opt.durations = {0, 1};
    opt.accept_prob = 0.3;
    auto sys = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
    // duplicate the system side by side
    TimedSystem dup = sys;
    dup.states = {"a0", "a1", "a2", "b0", "b1", "b2"};
    for (int64_t t : sys.durations) {
      EffectEndo e = EffectEndo::bottom(sys.backend, sys.base, 6, sys.n_labels());
      const EffectEndo& src = sys.step.at(t);
      for (int x = 0; x < 3; ++x) {
        for (int y = 0; y < 3; ++y) {
          e.at(x, y) = src.at(x, y);
          e.at(x + 3, y + 3) = src.at(x, y);
        }
        e.acc[static_cast<size_t>(x)] = src.acc[static_cast<size_t>(x)];
        e.acc[static_cast<size_t>(x + 3)] = src.acc[static_cast<size_t>(x)];
      }
      dup.step.at(t) = std::move(e);
    }
    for (auto hom : {CanonicalHom::StrongTimed, CanonicalHom::WeakTimed}) {
      auto res = coarsest_bisimulation(saturate(dup, hom, {.t_max = 3}));
      for (int x = 0; x < 3; ++x) REQUIRE(res.partition.same_block(x, x + 3));
    }
  }
}

TEST_CASE("wt2: weak-timed merges what strong-timed separates") {
  auto sys = fixture("wt2.json");
  int x = sys.state_index("x");
  int y = sys.state_index("y");

  auto strong = coarsest_bisimulation(saturate(sys, CanonicalHom::StrongTimed));
  REQUIRE(!strong.partition.same_block(x, y));

  auto weak = coarsest_bisimulation(saturate(sys, CanonicalHom::WeakTimed));
  REQUIRE(weak.partition.same_block(x, y));
  REQUIRE(weak.partition.same_block(x, sys.state_index("x1")));
  REQUIRE(weak.partition.same_block(sys.state_index("z"), sys.state_index("z1")));
}

TEST_CASE("check_bisimulation agrees with the coarsest partition") {
  std::mt19937_64 rng(1199);
  for (int trial = 0; trial < 20; ++trial) {
    SystemOptions opt;
    opt.n_states = 6;
    opt.durations = {0, 1, 2};
    opt.accept_prob = 0.25;
    auto sys = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
    auto hom = trial % 2 == 0 ? CanonicalHom::StrongTimed : CanonicalHom::WeakTimed;
    auto fam = saturate(sys, hom, {.t_max = 4});
    auto res = coarsest_bisimulation(fam);
    REQUIRE(check_bisimulation(fam, res.partition));
    REQUIRE(check_bisimulation(fam, Partition::discrete(6)));
    // coarsest: merging any two blocks must break the condition
    for (int a = 0; a < res.partition.n_blocks; ++a)
      for (int b = a + 1; b < res.partition.n_blocks; ++b)
        REQUIRE(!check_bisimulation(fam, res.partition.merge_blocks(a, b)));
  }
}

TEST_CASE("single-duration signatures suffice for strong refinement") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 12; ++trial) {
    SystemOptions opt;
    opt.n_states = 5;
    opt.durations = {0, 1};
    opt.accept_prob = 0.3;
    auto sys = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
    auto single = coarsest_bisimulation(saturate(sys, CanonicalHom::StrongTimed));

    // family materializing every duration word up to length 3
    SaturatedFamily words;
    words.source = sys;
    words.hom = CanonicalHom::StrongTimed;
    words.target = MonoidSpec::free_words(sys.durations);
    std::vector<std::vector<int64_t>> queue = {{}};
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      auto w = queue[qi];
      MonoidElem e;
      e.word = w;
      words.index.push_back(e);
      words.member.push_back(word_step(sys, std::span<const int64_t>(w)));
      if (w.size() < 3)
        for (int64_t t : sys.durations) {
          auto w2 = w;
          w2.push_back(t);
          queue.push_back(std::move(w2));
        }
    }
    auto full = coarsest_bisimulation(words);
    REQUIRE(single.partition == full.partition);
  }
}

TEST_CASE("language samples on the acceptance fixtures") {
  SECTION("acc1 accepts 1.sigma.0") {
    auto sys = fixture("acc1.json");
    auto tl = languages(sys, 0, LangMode::TL, {2, 2});
    REQUIRE(tl.words.count(make_word({1, 0}, {1})) == 1);
    auto utl = languages(sys, 0, LangMode::UTL, {2, 2});
    REQUIRE(utl.words.count(make_word({}, {1})) == 1);
  }

  SECTION("a state with no path to acceptance has the empty language") {
    auto sys = fixture("acc1.json");
    TimedSystem cut = sys;
    cut.step.at(0).set_accept(1, cut.base.bottom());
    cut.step.at(1).set_accept(1, cut.base.bottom());
    // still marked accepting overall? rebuild flag
    cut.has_accept = true;  // keep the mode available; y simply never accepts
    REQUIRE(languages(cut, 0, LangMode::TL, {3, 3}).words.empty());
  }

  SECTION("acc2: weak empty-action word vs strong tau letter") {
    auto sys = fixture("acc2.json");
    auto wtl = languages(sys, 0, LangMode::WTL, {2, 2});
    REQUIRE(wtl.words.count(make_word({0}, {})) == 1);
    auto tl = languages(sys, 0, LangMode::TL, {2, 2});
    REQUIRE(tl.words.count(make_word({0}, {})) == 0);
    REQUIRE(tl.words.count(make_word({0, 0}, {0})) == 1);
  }

  SECTION("missing acceptance raises") {
    auto sys = fixture("fig2.json");
    REQUIRE_THROWS_AS(languages(sys, 0, LangMode::TL, {1, 1}), NoAcceptance);
  }
}

TEST_CASE("engine languages agree with the brute-force walker") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 10; ++trial) {
    SystemOptions opt;
    opt.n_states = 4;
    opt.durations = {0, 1};
    opt.accept_prob = 0.5;
    opt.zero_cost_silent = true;
    for (const auto& q : {ScalarQuantale(ScalarKind::Bool),
                          ScalarQuantale(ScalarKind::NatInfMaxPlus)}) {
      Backend backend =
          q.kind() == ScalarKind::Bool ? Backend::NonDet : Backend::QWeighted;
      auto sys = random_system(backend, q, opt, rng);
      if (!sys.has_accept) continue;
      // weighted wutl saturates silent loops exactly, which the bounded
      // walker cannot reproduce; the nondet backend compares all four modes
      std::vector<LangMode> modes = {LangMode::TL, LangMode::UTL, LangMode::WTL};
      if (backend == Backend::NonDet) modes.push_back(LangMode::WUTL);
      for (auto mode : modes) {
        auto engine = languages(sys, 0, mode, {2, 2});
        auto brute = brute_languages(sys, 0, mode, {2, 2});
        INFO("mode " << lang_mode_name(mode) << " trial " << trial);
        REQUIRE(engine.words == brute);
      }
    }
  }
}

TEST_CASE("wtl equals tl run on the saturated family") {
  std::mt19937_64 rng(946);
  for (int trial = 0; trial < 8; ++trial) {
    SystemOptions opt;
    opt.n_states = 4;
    opt.durations = {0, 1};
    opt.accept_prob = 0.5;
    auto sys = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
    if (!sys.has_accept) continue;
    LangBound bound{2, 2};
    auto fam = saturate(sys, CanonicalHom::WeakTimed, {.t_max = bound.max_time});
    // read the family as a system over durations 0..t_max with the
    // rule-based accept as its raw accept column
    TimedSystem synth;
    synth.backend = sys.backend;
    synth.base = sys.base;
    synth.states = sys.states;
    synth.alphabet = sys.alphabet;
    synth.has_accept = sys.has_accept;
    for (int64_t t = 0; t <= fam.bounds.t_max; ++t) {
      synth.durations.push_back(t);
      EffectEndo stage = fam.member_at_nat(t);
      if (fam.has_rule_accept()) stage.acc = fam.rule_accept[static_cast<size_t>(t)];
      synth.step.emplace(t, std::move(stage));
    }
    for (int x = 0; x < sys.n_states(); ++x) {
      auto weak = languages(sys, x, LangMode::WTL, bound);
      auto strong_on_family = languages(synth, x, LangMode::TL, bound);
      REQUIRE(weak.words == strong_on_family.words);
    }
  }
}

TEST_CASE("language_equivalent verdicts") {
  auto sys = fixture("acc1.json");

  SECTION("reflexivity") {
    auto v = language_equivalent(sys, 0, 0, LangMode::TL, {3, 3});
    REQUIRE(v.kind == LangVerdict::Kind::Equal);
  }

  SECTION("acc1's x is distinguished from the dead state by 1.sigma.0") {
    auto v = language_equivalent(sys, 0, 1, LangMode::TL, {3, 3});
    REQUIRE(v.kind == LangVerdict::Kind::Distinguished);
    REQUIRE(v.witness);
    // one of the two sides accepts 1.sigma.0, the other the bare 0
    bool found = *v.witness == make_word({1, 0}, {1}) || *v.witness == make_word({0}, {});
    REQUIRE(found);
  }

  SECTION("two states accepting the same finite language are equal") {
    auto twin = load_system_text(R"({"backend":"nondet","alphabet":["a"],
      "durations":[0,1],"states":["x1","x2","y"],
      "steps":[{"from":"x1","label":"a","dur":1,"to":"y"},
               {"from":"x2","label":"a","dur":1,"to":"y"}],
      "accepting":[{"state":"y","dur":0}]})");
    for (auto mode : {LangMode::TL, LangMode::UTL, LangMode::WTL, LangMode::WUTL}) {
      auto v = language_equivalent(twin, 0, 1, mode, {3, 3});
      REQUIRE(v.kind == LangVerdict::Kind::Equal);
    }
  }
}

TEST_CASE("spectrum on wt2") {
  auto sys = fixture("wt2.json");
  auto spec = spectrum(sys, {}, {3, 3});
  REQUIRE(spec.rows.size() == 8);
  int x = sys.state_index("x");
  int y = sys.state_index("y");
  REQUIRE(!spec.rows[0].partition.same_block(x, y));  // strong-timed bisim
  REQUIRE(spec.rows[1].partition.same_block(x, y));   // weak-timed bisim
  REQUIRE(spec.all_edges_hold);
  for (const auto& e : spec.hasse) REQUIRE((e.holds || !e.checked));
}

TEST_CASE("spectrum ordering on random systems") {
  std::mt19937_64 rng(31415);
  struct Case {
    Backend backend;
    ScalarQuantale q;
  };
  std::vector<Case> cases = {{Backend::NonDet, ScalarQuantale(ScalarKind::Bool)},
                             {Backend::QWeighted, ScalarQuantale(ScalarKind::Bool)},
                             {Backend::QWeighted, ScalarQuantale(ScalarKind::NatInfMaxPlus)}};
  for (const auto& c : cases) {
    for (int trial = 0; trial < 12; ++trial) {
      SystemOptions opt;
      opt.n_states = 4;
      opt.durations = {0, 1};
      opt.accept_prob = 0.4;
      opt.tau_free = true;  // language rows run on tau-free accepting fixtures
      auto sys = random_system(c.backend, c.q, opt, rng);
      auto spec = spectrum(sys, {.t_max = 4}, {2, 2});
      INFO("backend " << backend_name(c.backend) << " trial " << trial);
      for (const auto& e : spec.hasse) {
        INFO(e.finer << " -> " << e.coarser);
        REQUIRE((e.holds || !e.checked));
      }
    }
  }
}

TEST_CASE("boolean-quantale degeneracy") {
  std::mt19937_64 rng(8128);
  for (int trial = 0; trial < 15; ++trial) {
    SystemOptions opt;
    opt.n_states = 5;
    opt.durations = {0, 1};
    opt.accept_prob = 0.3;
    auto nd = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
    TimedSystem qw = nd;
    qw.backend = Backend::QWeighted;
    qw.quantale_key = "bool";
    for (auto& [t, e] : qw.step) e.backend = Backend::QWeighted;
    for (auto hom : {CanonicalHom::StrongTimed, CanonicalHom::WeakTimed,
                     CanonicalHom::StrongAbstract, CanonicalHom::WeakAbstract}) {
      auto fn = saturate(nd, hom, {.t_max = 3});
      auto fq = saturate(qw, hom, {.t_max = 3});
      REQUIRE(fn.index.size() == fq.index.size());
      for (size_t i = 0; i < fn.index.size(); ++i) {
        REQUIRE(fn.member[i].mat == fq.member[i].mat);
        REQUIRE(fn.member[i].acc == fq.member[i].acc);
      }
      REQUIRE(coarsest_bisimulation(fn).partition == coarsest_bisimulation(fq).partition);
    }
  }
}

TEST_CASE("convex bisimulation distinguishes hulls, not generators") {
  // u: one half/half generator; v: the two Dirac generators.
  // With p, q distinguishable the hulls differ; once p ~ q they agree.
  auto sys = load_system_text(R"({"backend":"convex","alphabet":["a"],
    "durations":[0],"states":["u","v","p","q"],
    "convex_steps":[
      {"from":"u","dur":0,"generators":[{"mass":[
        {"label":"tau","to":"p","weight":"1/2"},
        {"label":"tau","to":"q","weight":"1/2"}]}]},
      {"from":"v","dur":0,"generators":[
        {"mass":[{"label":"tau","to":"p","weight":"1"}]},
        {"mass":[{"label":"tau","to":"q","weight":"1"}]}]}
    ]})");
  auto fam = saturate(sys, CanonicalHom::StrongTimed);
  auto res = coarsest_bisimulation(fam);
  int u = sys.state_index("u"), v = sys.state_index("v");
  int p = sys.state_index("p"), q = sys.state_index("q");
  REQUIRE(res.partition.same_block(p, q));  // both dead
  REQUIRE(!res.partition.same_block(u, p));
  // p ~ q collapses the quotient hulls of u and v... but v still has the
  // extreme generators {1(tau,[p])} while u only has the midpoint: on the
  // quotient they coincide because [p] = [q].
  REQUIRE(res.partition.same_block(u, v));

  // making q observable splits everything
  auto sys2 = load_system_text(R"({"backend":"convex","alphabet":["a"],
    "durations":[0],"states":["u","v","p","q"],
    "convex_steps":[
      {"from":"u","dur":0,"generators":[{"mass":[
        {"label":"tau","to":"p","weight":"1/2"},
        {"label":"tau","to":"q","weight":"1/2"}]}]},
      {"from":"v","dur":0,"generators":[
        {"mass":[{"label":"tau","to":"p","weight":"1"}]},
        {"mass":[{"label":"tau","to":"q","weight":"1"}]}]},
      {"from":"q","dur":0,"generators":[{"mass":[
        {"label":"a","to":"q","weight":"1"}]}]}
    ]})");
  auto res2 = coarsest_bisimulation(saturate(sys2, CanonicalHom::StrongTimed));
  REQUIRE(!res2.partition.same_block(sys2.state_index("u"), sys2.state_index("v")));
}
