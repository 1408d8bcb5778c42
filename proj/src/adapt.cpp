#include "adgrid/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

namespace adgrid {

double adapt_alpha(const DyadicSystem& sys, double C_R) {
  double K = sys.model.K_X;
  return 2.0 * K * K * K * (sys.C_2 + C_R) + C_R / 2.0;
}

std::vector<Cube> alpha_expansion(const DyadicSystem& sys,
                                  std::span<const Cube> family, double alpha) {
  const SpaceModel& m = sys.model;
  std::vector<Cube> out;
  for (const Cube& a : family) {
    Region d = diamond(sys, a, alpha);
    for (int64_t f = 0; f < cubes_at_level(m, a.level); ++f) {
      Cube q = cube_from_flat(m, a.level, f);
      if (d.intersects(cube_region(m, q))) out.push_back(q);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<Cube> cube_predecessor(std::span<const Cube> family, const Cube& c) {
  std::optional<Cube> best;
  for (const Cube& d : family) {
    if (d == c || !cube_contains(d, c)) continue;
    if (!best || best->level < d.level) best = d;  // finer superset is smaller
  }
  return best;
}

namespace {

std::string cube_str(const Cube& c) {
  std::ostringstream os;
  os << "(lev " << c.level << ", [" << c.coords[0] << "," << c.coords[1] << ","
     << c.coords[2] << "])";
  return os.str();
}

int index_of(const std::vector<Cube>& family, const Cube& c) {
  for (size_t i = 0; i < family.size(); ++i)
    if (family[i] == c) return static_cast<int>(i);
  return -1;
}

}  // namespace

HypothesesReport check_hypotheses(const DyadicSystem& sys, const AdaptInput& in) {
  const SpaceModel& m = sys.model;
  HypothesesReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    if (rep.violations.size() < 64) rep.violations.push_back(std::move(msg));
  };

  double K = m.K_X;
  double constraint = 4.0 * K * K * K * (1.0 + sys.C_2 / in.C_R) * std::pow(m.q, in.mu);
  if (!(constraint <= 1.0))
    fail("admissibility: 4 K^3 (1 + C_2/C_R) q^mu = " + std::to_string(constraint) + " > 1");

  // Same-level separation of C_R diamonds.
  for (size_t i = 0; i < in.family.size(); ++i)
    for (size_t j = i + 1; j < in.family.size(); ++j) {
      if (in.family[i].level != in.family[j].level) continue;
      Region di = diamond(sys, in.family[i], in.C_R);
      Region dj = diamond(sys, in.family[j], in.C_R);
      if (di.intersects(dj))
        fail("separation: diamonds of " + cube_str(in.family[i]) + " and " +
             cube_str(in.family[j]) + " intersect");
    }

  // Level gaps over the alpha-expansion.
  double alpha = adapt_alpha(sys, in.C_R);
  std::vector<Cube> expanded = alpha_expansion(sys, in.family, alpha);
  for (const Cube& a : expanded) {
    auto pred = cube_predecessor(expanded, a);
    if (pred && a.level < in.mu + pred->level)
      fail("successor gap: " + cube_str(a) + " has predecessor " + cube_str(*pred) +
           " closer than mu = " + std::to_string(in.mu));
  }

  // phi: strictly finer members, union inside the C_R/(2K) diamond.
  if (in.phi.size() != in.family.size()) {
    fail("phi size mismatch");
    return rep;
  }
  for (size_t i = 0; i < in.family.size(); ++i) {
    const Cube& a = in.family[i];
    Region small = diamond(sys, a, in.C_R / (2.0 * K));
    Region uni(m.cell_count());
    for (const Cube& q : in.phi[i]) {
      if (q.level <= a.level)
        fail("phi level: " + cube_str(q) + " not finer than " + cube_str(a));
      uni |= cube_region(m, q);
    }
    if (!small.contains(uni))
      fail("phi localization: phi(" + cube_str(a) + ") leaves the C_R/2K diamond");
  }
  return rep;
}

AdaptedGrid build_adapted_grid(const DyadicSystem& sys, const AdaptInput& in) {
  const SpaceModel& m = sys.model;
  HypothesesReport hyp = check_hypotheses(sys, in);
  if (!hyp.ok)
    throw ModelError("build_adapted_grid: hypotheses not verified: " +
                     (hyp.violations.empty() ? std::string("?") : hyp.violations.front()));
  for (size_t i = 0; i < in.family.size(); ++i)
    for (const Cube& q : in.phi[i])
      if (index_of(in.family, q) < 0)
        throw ModelError("build_adapted_grid: phi cube outside the family");

  // Deterministic processing order: finest occupied level first, coords order
  // within a level.
  std::vector<int> order(in.family.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (in.family[a].level != in.family[b].level)
      return in.family[a].level > in.family[b].level;
    return in.family[a] < in.family[b];
  });

  AdaptedGrid grid;
  grid.family = in.family;
  grid.regions.assign(in.family.size(), Region(m.cell_count()));
  std::vector<bool> built(in.family.size(), false);

  for (int idx : order) {
    const Cube& a = in.family[static_cast<size_t>(idx)];
    Region core = cube_region(m, a);
    for (const Cube& q : in.phi[static_cast<size_t>(idx)]) {
      int qi = index_of(in.family, q);
      core |= grid.regions[static_cast<size_t>(qi)];
    }
    Region out = core;
    for (size_t j = 0; j < in.family.size(); ++j) {
      if (!built[j] || in.family[j].level <= a.level) continue;
      if (grid.regions[j].intersects(core)) out |= grid.regions[j];
    }
    grid.regions[static_cast<size_t>(idx)] = std::move(out);
    built[static_cast<size_t>(idx)] = true;
  }
  return grid;
}

GridReport verify_adapted_grid(const DyadicSystem& sys, const AdaptInput& in,
                               const AdaptedGrid& grid) {
  const SpaceModel& m = sys.model;
  GridReport rep;
  double K = m.K_X;
  rep.measure_bound =
      m.C_d * std::pow(K * (sys.C_2 + in.C_R) / sys.C_1, std::log2(m.C_d));
  auto fail = [&](std::string msg) {
    rep.ok = false;
    if (rep.violations.size() < 64) rep.violations.push_back(std::move(msg));
  };
  if (grid.family.size() != in.family.size() || grid.regions.size() != in.family.size()) {
    fail("grid/input size mismatch");
    return rep;
  }

  for (size_t i = 0; i < grid.family.size(); ++i) {
    const Cube& a = grid.family[i];
    const Region& s = grid.regions[i];
    if (!s.contains(cube_region(m, a))) fail("region does not contain its cube " + cube_str(a));
    if (!diamond(sys, a, in.C_R).contains(s))
      fail("region exceeds the C_R diamond of " + cube_str(a));
    for (const Cube& q : in.phi[i]) {
      int qi = index_of(grid.family, q);
      if (qi < 0 || !s.contains(grid.regions[static_cast<size_t>(qi)]))
        fail("region of " + cube_str(a) + " misses phi member " + cube_str(q));
    }
    double ratio = static_cast<double>(s.count()) /
                   static_cast<double>(cube_cells(m, a));
    rep.max_measure_ratio = std::max(rep.max_measure_ratio, ratio);
    if (ratio > rep.measure_bound)
      fail("measure ratio " + std::to_string(ratio) + " exceeds bound at " + cube_str(a));
  }

  if (!is_nested(grid.regions)) fail("family of regions is not nested");

  for (size_t i = 0; i < grid.regions.size(); ++i)
    for (size_t j = i + 1; j < grid.regions.size(); ++j)
      if (grid.regions[i] == grid.regions[j]) fail("map is not injective");

  return rep;
}

AdaptInput random_admissible_instance(const DyadicSystem& sys, uint64_t seed,
                                      const InstanceParams& params) {
  const SpaceModel& m = sys.model;
  std::mt19937_64 rng(seed);
  AdaptInput in;
  in.C_R = params.C_R;
  in.mu = params.mu;

  // Occupied levels from the finest down, gaps >= mu.
  int top = m.J - 1;
  std::vector<int> levels;
  int lv = top - static_cast<int>(rng() % 2);
  for (int t = 0; t < params.levels && lv >= 1; ++t) {
    levels.push_back(lv);
    lv -= params.mu + static_cast<int>(rng() % 2);
  }

  for (int n : levels) {
    std::vector<Cube> kept;
    for (int c = 0; c < params.cubes_per_level; ++c) {
      Cube cand = cube_from_flat(m, n, static_cast<int64_t>(rng() % cubes_at_level(m, n)));
      bool separated = true;
      Region dc = diamond(sys, cand, in.C_R);
      for (const Cube& k : kept) {
        if (k == cand || dc.intersects(diamond(sys, k, in.C_R))) {
          separated = false;
          break;
        }
      }
      if (separated) kept.push_back(cand);
    }
    for (const Cube& k : kept) in.family.push_back(k);
  }
  std::sort(in.family.begin(), in.family.end(), [](const Cube& a, const Cube& b) {
    if (a.level != b.level) return a.level > b.level;
    return a < b;
  });

  // phi: strictly finer members fully inside the C_R/(2K) diamond.
  in.phi.assign(in.family.size(), {});
  for (size_t i = 0; i < in.family.size(); ++i) {
    const Cube& a = in.family[i];
    Region small = diamond(sys, a, in.C_R / (2.0 * m.K_X));
    for (const Cube& q : in.family) {
      if (q.level <= a.level) continue;
      if (small.contains(cube_region(m, q)) && (rng() % 2) == 0)
        in.phi[i].push_back(q);
    }
  }
  return in;
}

std::string grid_to_json(const DyadicSystem& sys, const AdaptInput& in,
                         const AdaptedGrid& grid) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["C_R"] = in.C_R;
  j["mu"] = in.mu;
  auto cube_json = [&](const Cube& c) {
    nlohmann::json cj;
    cj["level"] = c.level;
    std::vector<int64_t> coords(c.coords.begin(), c.coords.begin() + sys.model.k);
    cj["coords"] = coords;
    return cj;
  };
  j["cubes"] = nlohmann::json::array();
  j["regions"] = nlohmann::json::array();
  for (size_t i = 0; i < grid.family.size(); ++i) {
    j["cubes"].push_back(cube_json(grid.family[i]));
    j["regions"].push_back(grid.regions[i].cells());
  }
  j["phi"] = nlohmann::json::array();
  for (const auto& lst : in.phi) {
    nlohmann::json pj = nlohmann::json::array();
    for (const Cube& q : lst) pj.push_back(cube_json(q));
    j["phi"].push_back(pj);
  }
  return j.dump(2);
}

}  // namespace adgrid
