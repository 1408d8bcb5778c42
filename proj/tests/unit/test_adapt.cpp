#include <random>

#include "adgrid/adapt.hpp"
#include "doctest.h"

using namespace adgrid;

namespace {

Cube mk(int level, int64_t c0) {
  Cube c;
  c.level = level;
  c.coords = {c0, 0, 0};
  return c;
}

}  // namespace

TEST_CASE("alpha expansion") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 10));
  const SpaceModel& m = sys.model;

  // single cube, alpha of one cell: the cube and its immediate neighbors
  Cube a = mk(4, 3);
  auto tiny = alpha_expansion(sys, std::vector<Cube>{a}, 2.0 * m.cell_side() * 16.0);
  // radius 2 cells at level 4 scale: cells within one cell of A
  CHECK(tiny.size() == 3);

  // huge alpha: the whole level
  auto all = alpha_expansion(sys, std::vector<Cube>{a}, 64.0);
  CHECK(static_cast<int64_t>(all.size()) == cubes_at_level(m, 4));

  // A = [0, 1/4) at level 2, alpha = 1: one neighbor on each side
  Cube b = mk(2, 0);
  auto res = alpha_expansion(sys, std::vector<Cube>{b}, 1.0);
  REQUIRE(res.size() == 3);
  CHECK(res[0] == mk(2, 0));
  CHECK(res[1] == mk(2, 1));
  CHECK(res[2] == mk(2, 3));
}

TEST_CASE("cube predecessor") {
  std::vector<Cube> fam{mk(1, 0), mk(3, 2), mk(5, 9)};
  auto p1 = cube_predecessor(fam, mk(5, 9));
  REQUIRE(p1.has_value());
  CHECK(*p1 == mk(3, 2));
  auto p2 = cube_predecessor(fam, mk(3, 2));
  REQUIRE(p2.has_value());
  CHECK(*p2 == mk(1, 0));
  CHECK(!cube_predecessor(fam, mk(1, 0)).has_value());
}

TEST_CASE("hypotheses: admissibility constraint on mu") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 10));
  // K=1, C_2=1, C_R=4: the constraint reads 5 * 2^-mu <= 1, so mu >= 3
  AdaptInput in;
  in.family = {mk(5, 7)};
  in.phi = {{}};
  in.C_R = 4.0;
  in.mu = 3;
  CHECK(check_hypotheses(sys, in).ok);
  in.mu = 2;
  CHECK(!check_hypotheses(sys, in).ok);
}

TEST_CASE("hypotheses: separation violations are reported") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 10));
  AdaptInput in;
  in.family = {mk(5, 7), mk(5, 8)};  // touching cubes, overlapping diamonds
  in.phi = {{}, {}};
  in.C_R = 4.0;
  in.mu = 3;
  HypothesesReport rep = check_hypotheses(sys, in);
  CHECK(!rep.ok);
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.find("separation") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("single cube builds to itself") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 10));
  AdaptInput in;
  in.family = {mk(4, 5)};
  in.phi = {{}};
  AdaptedGrid grid = build_adapted_grid(sys, in);
  CHECK(grid.regions[0] == cube_region(sys.model, in.family[0]));
  CHECK(verify_adapted_grid(sys, in, grid).ok);
}

TEST_CASE("far-apart family with empty phi stays untouched") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 10));
  AdaptInput in;
  in.family = {mk(6, 0), mk(6, 32), mk(3, 4)};
  std::sort(in.family.begin(), in.family.end(), [](const Cube& a, const Cube& b) {
    if (a.level != b.level) return a.level > b.level;
    return a < b;
  });
  in.phi.assign(3, {});
  REQUIRE(check_hypotheses(sys, in).ok);
  AdaptedGrid grid = build_adapted_grid(sys, in);
  for (size_t i = 0; i < grid.family.size(); ++i)
    CHECK(grid.regions[i] == cube_region(sys.model, grid.family[i]));
}

TEST_CASE("build refuses bad inputs") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 10));
  AdaptInput in;
  in.family = {mk(5, 7), mk(5, 8)};
  in.phi = {{}, {}};
  CHECK_THROWS_AS(build_adapted_grid(sys, in), ModelError);

  AdaptInput dom;
  dom.family = {mk(3, 1)};
  dom.phi = {{mk(6, 9)}};  // not a member
  // phi leaving the family is caught (either as a localization violation or
  // as the explicit domain error)
  CHECK_THROWS_AS(build_adapted_grid(sys, dom), ModelError);
}

TEST_CASE("random admissible instances verify, k=1") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 12));
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    AdaptInput in = random_admissible_instance(sys, seed, InstanceParams{});
    REQUIRE(check_hypotheses(sys, in).ok);
    AdaptedGrid grid = build_adapted_grid(sys, in);
    GridReport rep = verify_adapted_grid(sys, in, grid);
    CHECK(rep.ok);
    CHECK(rep.max_measure_ratio <= 20.0);
  }
}

TEST_CASE("random admissible instances verify, k=2 and squared metric") {
  DyadicSystem sys2 = build_system(make_model(Kind::TorusSup, 2, 6));
  InstanceParams p2;
  p2.levels = 2;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    AdaptInput in = random_admissible_instance(sys2, seed, p2);
    REQUIRE(check_hypotheses(sys2, in).ok);
    AdaptedGrid grid = build_adapted_grid(sys2, in);
    CHECK(verify_adapted_grid(sys2, in, grid).ok);
  }
  DyadicSystem sq = build_system(make_model(Kind::TorusSquared, 1, 10));
  InstanceParams ps;
  ps.levels = 2;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    AdaptInput in = random_admissible_instance(sq, seed, ps);
    REQUIRE(check_hypotheses(sq, in).ok);
    AdaptedGrid grid = build_adapted_grid(sq, in);
    CHECK(verify_adapted_grid(sq, in, grid).ok);
  }
}

TEST_CASE("sigma absorbs phi members") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 12));
  // a coarse cube with two fine members inside its small diamond
  AdaptInput in;
  Cube coarse = mk(3, 2);
  Cube f1 = mk(7, 2 * 16 + 3);
  Cube f2 = mk(7, 2 * 16 + 12);
  in.family = {f1, f2, coarse};
  in.phi = {{}, {}, {f1, f2}};
  REQUIRE(check_hypotheses(sys, in).ok);
  AdaptedGrid grid = build_adapted_grid(sys, in);
  GridReport rep = verify_adapted_grid(sys, in, grid);
  CHECK(rep.ok);
  CHECK(grid.regions[2].contains(grid.regions[0]));
  CHECK(grid.regions[2].contains(grid.regions[1]));
}

TEST_CASE("verifier catches injected faults") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 12));
  AdaptInput in = random_admissible_instance(sys, 99, InstanceParams{});
  REQUIRE(check_hypotheses(sys, in).ok);
  AdaptedGrid grid = build_adapted_grid(sys, in);
  REQUIRE(verify_adapted_grid(sys, in, grid).ok);

  SUBCASE("region inflated beyond its diamond") {
    AdaptedGrid bad = grid;
    Region outside = diamond(sys, bad.family[0], in.C_R).complement();
    auto cells = outside.cells();
    REQUIRE(!cells.empty());
    bad.regions[0].set(cells[cells.size() / 2]);
    GridReport rep = verify_adapted_grid(sys, in, bad);
    CHECK(!rep.ok);
    bool found = false;
    for (const auto& v : rep.violations)
      if (v.find("diamond") != std::string::npos) found = true;
    CHECK(found);
  }

  SUBCASE("two regions partially overlapping") {
    REQUIRE(grid.regions.size() >= 2);
    AdaptedGrid bad = grid;
    // graft half of another region onto this one without containment
    size_t a = 0, b = 1;
    for (size_t j = 1; j < bad.regions.size(); ++j)
      if (!bad.regions[0].intersects(bad.regions[j])) {
        b = j;
        break;
      }
    auto cells = bad.regions[b].cells();
    REQUIRE(!cells.empty());
    bad.regions[a].set(cells[0]);
    GridReport rep = verify_adapted_grid(sys, in, bad);
    CHECK(!rep.ok);
  }
}

TEST_CASE("determinism: identical inputs produce identical grids") {
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 12));
  AdaptInput in = random_admissible_instance(sys, 7, InstanceParams{});
  AdaptedGrid g1 = build_adapted_grid(sys, in);
  AdaptedGrid g2 = build_adapted_grid(sys, in);
  CHECK(grid_to_json(sys, in, g1) == grid_to_json(sys, in, g2));
  AdaptInput in2 = random_admissible_instance(sys, 7, InstanceParams{});
  AdaptedGrid g3 = build_adapted_grid(sys, in2);
  CHECK(grid_to_json(sys, in2, g3) == grid_to_json(sys, in, g1));
}
