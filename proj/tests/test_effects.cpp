#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "timedeq/effects.hpp"

using namespace timedeq;
using namespace timedeq::testing;

namespace {
const ScalarQuantale kBool(ScalarKind::Bool);
const ScalarQuantale kNat(ScalarKind::NatInfMaxPlus);
}  // namespace

TEST_CASE("composition follows the label-absorption clauses") {
  // states: x=0, y=1, z=2; labels: sigma=1, theta=2
  SECTION("visible step absorbs a following tau step") {
    auto f = matrix_endo(Backend::NonDet, kBool, 3, 2, {{0, 1, 1}});
    auto g = matrix_endo(Backend::NonDet, kBool, 3, 2, {{1, 0, 2}});
    auto c = compose(f, g);
    REQUIRE(!c.at(0, 2).w[1].is_bot());
    REQUIRE(c.at(0, 2).w[0].is_bot());
    REQUIRE(c.at(0, 2).w[2].is_bot());
  }

  SECTION("two visible steps are incomposable") {
    auto f = matrix_endo(Backend::NonDet, kBool, 3, 2, {{0, 1, 1}});
    auto g = matrix_endo(Backend::NonDet, kBool, 3, 2, {{1, 2, 2}});
    auto c = compose(f, g);
    REQUIRE(c == EffectEndo::bottom(Backend::NonDet, kBool, 3, 2));
  }

  SECTION("identity is a two-sided unit") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
      auto f = random_matrix_endo(Backend::NonDet, kBool, 4, 2, rng, 0.4, 0.3);
      auto id = EffectEndo::identity(Backend::NonDet, kBool, 4, 2);
      REQUIRE(compose(f, id) == f);
      REQUIRE(compose(id, f) == f);
    }
  }

  SECTION("weighted costs add along a composable pair") {
    auto f = EffectEndo::bottom(Backend::QWeighted, kNat, 3, 1);
    f.set_step(0, 1, 1, Scalar::fin(2));
    auto g = EffectEndo::bottom(Backend::QWeighted, kNat, 3, 1);
    g.set_step(1, 0, 2, Scalar::fin(3));
    auto c = compose(f, g);
    REQUIRE(c.at(0, 2).w[1] == Scalar::fin(5));
  }

  SECTION("backend and dimension mismatches are rejected") {
    auto f = EffectEndo::bottom(Backend::NonDet, kBool, 2, 1);
    auto g = EffectEndo::bottom(Backend::QWeighted, kNat, 2, 1);
    REQUIRE_THROWS_AS(compose(f, g), BackendMismatch);
    auto h = EffectEndo::bottom(Backend::NonDet, kBool, 3, 1);
    REQUIRE_THROWS_AS(join(f, h), BackendMismatch);
  }
}

TEST_CASE("composition is associative and distributes over join") {
  std::mt19937_64 rng(91);
  for (const auto& q : {kBool, kNat}) {
    Backend backend = q.kind() == ScalarKind::Bool ? Backend::NonDet : Backend::QWeighted;
    for (int trial = 0; trial < 30; ++trial) {
      auto f = random_matrix_endo(backend, q, 4, 2, rng, 0.35, 0.25);
      auto g = random_matrix_endo(backend, q, 4, 2, rng, 0.35, 0.25);
      auto h = random_matrix_endo(backend, q, 4, 2, rng, 0.35, 0.25);
      REQUIRE(compose(compose(f, g), h) == compose(f, compose(g, h)));
      REQUIRE(compose(join(f, g), h) == join(compose(f, h), compose(g, h)));
      REQUIRE(compose(h, join(f, g)) == join(compose(h, f), compose(h, g)));
      REQUIRE(join(f, f) == f);
      REQUIRE(leq(f, join(f, g)));
    }
  }
}

TEST_CASE("non-deterministic arithmetic agrees with the set-based reference") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    auto f = random_matrix_endo(Backend::NonDet, kBool, 5, 2, rng, 0.3, 0.3);
    auto g = random_matrix_endo(Backend::NonDet, kBool, 5, 2, rng, 0.3, 0.3);
    auto fs = to_sets(f);
    auto gs = to_sets(g);
    REQUIRE(to_sets(compose(f, g)).steps == set_compose(fs, gs).steps);
    REQUIRE(to_sets(compose(f, g)).accepts == set_compose(fs, gs).accepts);
    REQUIRE(to_sets(join(f, g)).steps == set_join(fs, gs).steps);
    REQUIRE(leq(f, g) == set_leq(fs, gs));
  }
}

TEST_CASE("endo_star computes the saturation of the running example") {
  auto star = endo_star(fig2_left());
  REQUIRE(star == fig2_right());
}

TEST_CASE("endo_star basics") {
  SECTION("identity is a fixed point") {
    auto id = EffectEndo::identity(Backend::NonDet, kBool, 4, 2);
    REQUIRE(endo_star(id) == id);
  }

  SECTION("a weighted tau loop diverges to infinity") {
    auto f = EffectEndo::bottom(Backend::QWeighted, kNat, 2, 1);
    f.set_step(0, 0, 0, Scalar::fin(1));
    auto s = endo_star(f);
    REQUIRE(s.at(0, 0).w[0] == Scalar::inf());
    REQUIRE(s.at(1, 1).w[0] == Scalar::fin(0));  // reflexive part
  }

  SECTION("convex backend is refused") {
    auto e = EffectEndo::bottom(Backend::Convex, kBool, 2, 1);
    REQUIRE_THROWS_AS(endo_star(e), UnsupportedExact);
  }
}

TEST_CASE("endo_star is the least saturated endomorphism above its argument") {
  std::mt19937_64 rng(5150);
  for (const auto& q : {kBool, kNat}) {
    Backend backend = q.kind() == ScalarKind::Bool ? Backend::NonDet : Backend::QWeighted;
    for (int trial = 0; trial < 25; ++trial) {
      auto f = random_matrix_endo(backend, q, 4, 2, rng, 0.3, 0.2);
      auto id = EffectEndo::identity(backend, q, 4, 2);
      auto s = endo_star(f);
      REQUIRE(leq(id, s));
      REQUIRE(leq(compose(s, s), s));
      REQUIRE(leq(f, s));
      // minimality against a sampled saturated competitor above f
      auto t = endo_star(join(f, random_matrix_endo(backend, q, 4, 2, rng, 0.2, 0.2)));
      REQUIRE(leq(s, t));
    }
  }
}

TEST_CASE("bounded_star approximates endo_star from below") {
  SECTION("depth zero is the identity") {
    auto f = fig2_left();
    auto r = bounded_star(f, 0);
    REQUIRE(r.endo == EffectEndo::identity(Backend::NonDet, kBool, 3, 2));
    REQUIRE(!r.converged);  // fig2 has steps beyond the identity
    auto id = EffectEndo::identity(Backend::NonDet, kBool, 3, 2);
    REQUIRE(bounded_star(id, 0).converged);
  }

  SECTION("the running example stabilizes by depth 3") {
    auto r = bounded_star(fig2_left(), 3);
    REQUIRE(r.converged);
    REQUIRE(r.endo == endo_star(fig2_left()));
  }

  SECTION("random systems: bounded join is dominated by the closure") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      auto f = random_matrix_endo(Backend::NonDet, kBool, 5, 2, rng, 0.3, 0.2);
      auto r = bounded_star(f, 6);
      auto s = endo_star(f);
      REQUIRE(leq(r.endo, s));
      if (r.converged) REQUIRE(r.endo == s);
    }
  }
}
