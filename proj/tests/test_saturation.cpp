#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "helpers.hpp"
#include "timedeq/oracles.hpp"
#include "timedeq/saturation.hpp"

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

bool members_equal(const SaturatedFamily& a, const SaturatedFamily& b) {
  if (a.index.size() != b.index.size()) return false;
  for (size_t i = 0; i < a.index.size(); ++i)
    if (!(a.member[i] == b.member[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("weak-abstract saturation of the running example is its closure") {
  auto sys = fixture("fig2.json");
  auto fam = saturate(sys, CanonicalHom::WeakAbstract);
  REQUIRE(fam.exact);
  REQUIRE(fam.index.size() == 1);
  REQUIRE(fam.member[0] == fig2_right());
}

TEST_CASE("weak-timed saturation composes silent time around visible steps") {
  auto sys = fixture("wt1.json");
  auto fam = saturate(sys, CanonicalHom::WeakTimed, {.t_max = 2});
  // x =(tau,1)=> y and y -(sigma,0)-> y give x =(sigma,1)=> y
  const auto& m1 = fam.member_at_nat(1);
  REQUIRE(!m1.at(0, 1).w[1].is_bot());
  REQUIRE(!m1.at(0, 1).w[0].is_bot());
  // nothing at duration 2 beyond dead entries into y's sigma loop
  const auto& m0 = fam.member_at_nat(0);
  REQUIRE(!m0.at(1, 1).w[1].is_bot());
}

TEST_CASE("identity saturation returns the steps verbatim") {
  auto sys = fixture("wt1.json");
  auto fam = saturate(sys, CanonicalHom::StrongTimed);
  REQUIRE(fam.index.size() == 1 + sys.durations.size());
  REQUIRE(fam.member[0] ==
          EffectEndo::identity(sys.backend, sys.base, sys.n_states(), sys.n_labels()));
  for (size_t i = 0; i < sys.durations.size(); ++i)
    REQUIRE(fam.member[i + 1] == sys.step.at(sys.durations[i]));
}

TEST_CASE("the bottom system saturates to bare reflexivity") {
  auto sys = load_system_text(R"({"backend":"nondet","alphabet":["a"],
    "durations":[0,1],"states":["x","y"],"steps":[]})");
  auto id = EffectEndo::identity(sys.backend, sys.base, 2, 1);
  auto bot = EffectEndo::bottom(sys.backend, sys.base, 2, 1);
  for (auto hom : {CanonicalHom::StrongTimed, CanonicalHom::WeakTimed,
                   CanonicalHom::StrongAbstract, CanonicalHom::WeakAbstract}) {
    auto fam = saturate(sys, hom, {.t_max = 3, .depth = 2});
    for (size_t i = 0; i < fam.index.size(); ++i) {
      if (fam.target.eq(fam.index[i], fam.target.unit())) {
        REQUIRE(fam.member[i] == id);
      } else {
        REQUIRE(fam.member[i] == bot);
      }
    }
  }
}

TEST_CASE("lax-functor laws hold on every saturation output") {
  std::mt19937_64 rng(99);
  for (auto hom : {CanonicalHom::StrongTimed, CanonicalHom::WeakTimed,
                   CanonicalHom::StrongAbstract, CanonicalHom::WeakAbstract}) {
    for (int trial = 0; trial < 8; ++trial) {
      SystemOptions opt;
      opt.n_states = 4;
      opt.durations = {0, 1};
      opt.accept_prob = 0.3;
      auto sys = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
      auto fam = saturate(sys, hom, {.t_max = 4});
      auto report = check_lax_laws(fam);
      REQUIRE(report.all_pass());
    }
  }

  SECTION("a hand-built violating family is caught") {
    auto sys = fixture("wt1.json");
    auto fam = saturate(sys, CanonicalHom::WeakTimed, {.t_max = 2});
    // inflate member(1): its self-composition then exceeds member(2)
    EffectEndo full = EffectEndo::bottom(sys.backend, sys.base, 2, 1);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int l = 0; l <= 1; ++l) full.set_step(x, l, y, sys.base.one());
    fam.member[1] = full;
    auto report = check_lax_laws(fam);
    REQUIRE(!report.all_pass());
  }
}

TEST_CASE("pullback then resaturation is the identity (idempotency)") {
  SECTION("on the running example, weak-abstract") {
    auto fam = saturate(fixture("fig2.json"), CanonicalHom::WeakAbstract);
    auto again = pullback_resaturate(fam);
    REQUIRE(members_equal(fam, again));
  }

  SECTION("identity-hom families are unchanged") {
    auto fam = saturate(fixture("wt1.json"), CanonicalHom::StrongTimed);
    auto again = pullback_resaturate(fam);
    REQUIRE(members_equal(fam, again));
  }

  SECTION("random systems, all four homs") {
    std::mt19937_64 rng(123);
    for (auto hom : {CanonicalHom::StrongTimed, CanonicalHom::WeakTimed,
                     CanonicalHom::StrongAbstract, CanonicalHom::WeakAbstract}) {
      for (int trial = 0; trial < 10; ++trial) {
        SystemOptions opt;
        opt.n_states = 4;
        opt.durations = {0, 1, 2};
        opt.accept_prob = 0.25;
        auto sys =
            random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
        auto fam = saturate(sys, hom, {.t_max = 3});
        auto again = pullback_resaturate(fam);
        REQUIRE(members_equal(fam, again));
      }
    }
  }
}

TEST_CASE("saturation is compositional across the monoid square") {
  std::mt19937_64 rng(321);
  for (const auto& q : {ScalarQuantale(ScalarKind::Bool),
                        ScalarQuantale(ScalarKind::NatInfMaxPlus)}) {
    Backend backend = q.kind() == ScalarKind::Bool ? Backend::NonDet : Backend::QWeighted;
    for (int trial = 0; trial < 12; ++trial) {
      SystemOptions opt;
      opt.n_states = 4;
      opt.durations = {0, 1};
      opt.accept_prob = 0.3;
      auto sys = random_system(backend, q, opt, rng);

      auto direct = saturate(sys, CanonicalHom::WeakAbstract).member[0];

      // weak-then-abstract: star of the join of the weak-timed members
      auto weak = saturate(sys, CanonicalHom::WeakTimed);
      EffectEndo joined =
          EffectEndo::bottom(sys.backend, sys.base, sys.n_states(), sys.n_labels());
      for (const auto& m : weak.member) joined = join(joined, m);
      auto via_weak = endo_star(joined);

      // abstract-then-weak: star of the join of the power members
      auto abs = saturate(sys, CanonicalHom::StrongAbstract);
      EffectEndo joined2 =
          EffectEndo::bottom(sys.backend, sys.base, sys.n_states(), sys.n_labels());
      for (const auto& m : abs.member) joined2 = join(joined2, m);
      auto via_abs = endo_star(joined2);

      REQUIRE(via_weak == direct);
      REQUIRE(via_abs == direct);
    }
  }
}

TEST_CASE("adding a transition only grows the saturated members") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    SystemOptions opt;
    opt.n_states = 4;
    opt.durations = {0, 1};
    auto sys = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
    TimedSystem bigger = sys;
    std::uniform_int_distribution<int> st(0, 3), lab(0, 2), dur(0, 1);
    bigger.step.at(dur(rng)).set_step(st(rng), lab(rng), st(rng), sys.base.one());
    for (auto hom : {CanonicalHom::StrongTimed, CanonicalHom::WeakTimed,
                     CanonicalHom::StrongAbstract, CanonicalHom::WeakAbstract}) {
      auto fam1 = saturate(sys, hom, {.t_max = 3});
      auto fam2 = saturate(bigger, hom, {.t_max = 3});
      for (size_t i = 0; i < fam1.index.size(); ++i)
        REQUIRE(leq(fam1.member[i], fam2.member[i]));
    }
  }
}

TEST_CASE("weak-timed members equal the rule closure on nondet systems") {
  std::mt19937_64 rng(20240);
  for (int trial = 0; trial < 25; ++trial) {
    SystemOptions opt;
    opt.n_states = 5;
    opt.durations = {0, 1, 2};
    opt.density = 0.25;
    auto sys = random_system(Backend::NonDet, ScalarQuantale(ScalarKind::Bool), opt, rng);
    const int64_t t_max = 6;
    auto fam = saturate(sys, CanonicalHom::WeakTimed, {.t_max = t_max});
    auto closure = rule_closure_weak_steps(sys, t_max);
    for (int64_t t = 0; t <= t_max; ++t) {
      const auto& m = fam.member_at_nat(t);
      for (int x = 0; x < sys.n_states(); ++x)
        for (int y = 0; y < sys.n_states(); ++y)
          for (int l = 0; l <= sys.n_labels(); ++l) {
            bool engine = !m.at(x, y).w[l].is_bot();
            bool oracle = closure.steps.count({x, l, t, y}) > 0;
            REQUIRE(engine == oracle);
          }
    }
  }
}

TEST_CASE("weak-timed members equal the literal weighted recursion") {
  std::mt19937_64 rng(5061);
  for (int trial = 0; trial < 12; ++trial) {
    SystemOptions opt;
    opt.n_states = 4;
    opt.durations = {0, 1};
    opt.accept_prob = 0.3;
    opt.zero_cost_silent = true;  // keeps the value lattice finite
    auto sys =
        random_system(Backend::QWeighted, ScalarQuantale(ScalarKind::NatInfMaxPlus), opt, rng);
    const int64_t t_max = 4;
    auto fam = saturate(sys, CanonicalHom::WeakTimed, {.t_max = t_max});
    auto table = brute_weighted_weak(sys, t_max, 64);
    REQUIRE(table.stabilized);
    for (int64_t t = 0; t <= t_max; ++t) {
      const auto& m = fam.member_at_nat(t);
      for (int x = 0; x < sys.n_states(); ++x)
        for (int y = 0; y < sys.n_states(); ++y)
          REQUIRE(m.at(x, y) == table.at(t, x, y));
    }
    if (sys.has_accept) {
      REQUIRE(fam.has_rule_accept());
      for (int64_t t = 0; t <= t_max; ++t)
        for (int x = 0; x < sys.n_states(); ++x)
          REQUIRE(fam.rule_accept[static_cast<size_t>(t)][static_cast<size_t>(x)] ==
                  table.accepts[static_cast<size_t>(t)][static_cast<size_t>(x)]);
    }
  }
}

TEST_CASE("convex weak saturation equals the literal recursion") {
  std::mt19937_64 rng(8080);
  for (int trial = 0; trial < 8; ++trial) {
    SystemOptions opt;
    opt.n_states = 4;
    opt.n_labels = 1;
    opt.durations = {0, 1};
    opt.accept_prob = 0.3;
    auto sys = random_system(Backend::Convex, ScalarQuantale(ScalarKind::Bool), opt, rng);
    const int64_t t_max = 2;
    const int depth = 8;
    auto fam = saturate(sys, CanonicalHom::WeakTimed, {.t_max = t_max, .depth = depth});
    auto table = brute_convex_weak(sys, t_max, depth);
    for (int64_t t = 0; t <= t_max; ++t) {
      const auto& m = fam.member_at_nat(t);
      for (int x = 0; x < sys.n_states(); ++x) {
        INFO("trial " << trial << " t " << t << " x " << x);
        REQUIRE(hulls_equal(m.gens[static_cast<size_t>(x)],
                            table.gens[static_cast<size_t>(t)][static_cast<size_t>(x)]));
      }
    }
  }
}

TEST_CASE("the general finite-monoid construction") {
  auto z2 = MonoidSpec::finite({"0", "1"}, {{0, 1}, {1, 0}}, 0);
  auto z4 = MonoidSpec::finite(
      {"0", "1", "2", "3"},
      {{0, 1, 2, 3}, {1, 2, 3, 0}, {2, 3, 0, 1}, {3, 0, 1, 2}}, 0);
  auto one = MonoidSpec::finite({"*"}, {{0}}, 0);
  ScalarQuantale q(ScalarKind::Bool);

  SECTION("bang saturation is the transitive closure of the joined steps") {
    // Thm-style joins range over non-empty words; the reflexive part only
    // appears when the input family is lax. Compare against A o A* = A+.
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      EndoFamily fam;
      fam.monoid = z2;
      fam.member.push_back(random_matrix_endo(Backend::NonDet, q, 4, 2, rng, 0.3, 0.2));
      fam.member.push_back(random_matrix_endo(Backend::NonDet, q, 4, 2, rng, 0.3, 0.2));
      auto bang = MonoidHom::finite(z2, one, {0, 0});
      auto sat = saturate_family(fam, bang);
      REQUIRE(sat.exact);
      EffectEndo joined = join(fam.member[0], fam.member[1]);
      REQUIRE(sat.member[0] == compose(joined, endo_star(joined)));
    }
  }

  SECTION("pulling a strict family back along Z4 -> Z2 reproduces it") {
    // rho_0 = id, rho_1 = the nilpotent visible step
    EffectEndo id = EffectEndo::identity(Backend::NonDet, q, 2, 1);
    EffectEndo b = EffectEndo::bottom(Backend::NonDet, q, 2, 1);
    b.set_step(0, 1, 1, q.one());
    auto hom = MonoidHom::finite(z4, z2, {0, 1, 0, 1});
    EndoFamily pulled;
    pulled.monoid = z4;
    pulled.member = {id, b, id, b};
    auto sat = saturate_family(pulled, hom);
    REQUIRE(sat.exact);
    REQUIRE(sat.member[0] == id);
    REQUIRE(sat.member[1] == join(b, compose(b, compose(id, id))));
    REQUIRE(sat.member[1] == b);
  }

  SECTION("the loop agrees with brute-force word enumeration") {
    std::mt19937_64 rng(31337);
    auto hom = MonoidHom::finite(z4, z2, {0, 1, 0, 1});
    for (int trial = 0; trial < 8; ++trial) {
      EndoFamily fam;
      fam.monoid = z4;
      for (int m = 0; m < 4; ++m)
        fam.member.push_back(random_matrix_endo(Backend::NonDet, q, 3, 1, rng, 0.3, 0.2));
      auto sat = saturate_family(fam, hom);
      REQUIRE(sat.exact);
      // brute force: all products of words over Z4, bucketed by image, grown
      // until stabilization
      std::vector<EffectEndo> brute(2, EffectEndo::bottom(Backend::NonDet, q, 3, 1));
      for (int m = 0; m < 4; ++m)
        brute[static_cast<size_t>(hom.map[m])] =
            join(brute[static_cast<size_t>(hom.map[m])], fam.member[static_cast<size_t>(m)]);
      // fixed point of one-letter extension
      bool changed = true;
      std::vector<std::vector<EffectEndo>> frontier;  // [image][...]
      while (changed) {
        changed = false;
        std::vector<EffectEndo> next = brute;
        for (int m = 0; m < 4; ++m)
          for (int img = 0; img < 2; ++img) {
            int target = (hom.map[m] + img) % 2;
            EffectEndo cand = compose(fam.member[static_cast<size_t>(m)],
                                      brute[static_cast<size_t>(img)]);
            EffectEndo joined = join(next[static_cast<size_t>(target)], cand);
            if (!(joined == next[static_cast<size_t>(target)])) changed = true;
            next[static_cast<size_t>(target)] = std::move(joined);
          }
        brute = std::move(next);
      }
      REQUIRE(sat.member[0] == brute[0]);
      REQUIRE(sat.member[1] == brute[1]);
    }
  }
}
