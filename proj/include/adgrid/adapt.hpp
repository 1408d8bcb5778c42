#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adgrid/cubes.hpp"
#include "adgrid/model.hpp"
#include "adgrid/region.hpp"

namespace adgrid {

// Input family for the adapted-grid construction: a finite cube family with a
// refinement map phi, a sparsity radius C_R and a level-gap parameter mu.
struct AdaptInput {
  std::vector<Cube> family;             // deterministic order (level desc, coords)
  std::vector<std::vector<Cube>> phi;   // phi[i] lists cubes of the family
  double C_R = 4.0;
  int mu = 3;
};

// alpha = 2 K^3 (C_2 + C_R) + C_R / 2.
double adapt_alpha(const DyadicSystem& sys, double C_R);

// All cubes of level lev(A) meeting alpha <> A, over the family. Contains it.
std::vector<Cube> alpha_expansion(const DyadicSystem& sys,
                                  std::span<const Cube> family, double alpha);

// Smallest strict cube superset within the family; nullopt means X.
std::optional<Cube> cube_predecessor(std::span<const Cube> family, const Cube& c);

struct HypothesesReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Verifies the admissibility constraint on (C_R, mu), pairwise same-level
// separation of C_R-diamonds, the level-gap condition over the
// alpha-expansion, and both phi conditions (finer levels, union inside the
// C_R/(2K) diamond), all cell-exactly.
HypothesesReport check_hypotheses(const DyadicSystem& sys, const AdaptInput& in);

struct AdaptedGrid {
  std::vector<Cube> family;     // same order as the input family
  std::vector<Region> regions;  // enlarged set per cube
};

// Processes occupied levels from the finest down; each region is the cube,
// the regions of its phi-cubes, and every previously built region meeting
// that core.  Throws if the hypotheses fail or phi leaves the family.
AdaptedGrid build_adapted_grid(const DyadicSystem& sys, const AdaptInput& in);

struct GridReport {
  bool ok = true;
  std::vector<std::string> violations;
  double max_measure_ratio = 0.0;
  double measure_bound = 0.0;  // C_d (K (C_2 + C_R) / C_1)^(log2 C_d)
};

// Independent re-check: cube and phi-region inclusions, the C_R-diamond cap,
// the measure bound, nestedness and injectivity, all from scratch.
GridReport verify_adapted_grid(const DyadicSystem& sys, const AdaptInput& in,
                               const AdaptedGrid& grid);

struct InstanceParams {
  int levels = 3;           // occupied levels (gaps >= mu)
  int cubes_per_level = 6;  // sampled before thinning
  double C_R = 4.0;
  int mu = 3;
};

// Random admissible instance: maximal-level cubes sampled first, thinned by
// greedy separation; phi picks strictly finer members inside the small
// diamond.  Always passes check_hypotheses.
AdaptInput random_admissible_instance(const DyadicSystem& sys, uint64_t seed,
                                      const InstanceParams& params);

std::string grid_to_json(const DyadicSystem& sys, const AdaptInput& in,
                         const AdaptedGrid& grid);

}  // namespace adgrid
