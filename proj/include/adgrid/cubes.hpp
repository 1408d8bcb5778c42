#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adgrid/model.hpp"
#include "adgrid/region.hpp"

namespace adgrid {

// Half-open dyadic cube: prod_i [c_i 2^-n, (c_i+1) 2^-n).  Cubes at one level
// partition the torus exactly; measure is 2^(-n*k).
struct Cube {
  int level = 0;
  std::array<int64_t, kMaxDim> coords{};

  bool operator==(const Cube&) const = default;
  // Deterministic order: (level, c0, c1, c2).
  bool operator<(const Cube& o) const;
};

int64_t cubes_at_level(const SpaceModel& m, int level);
Cube cube_from_flat(const SpaceModel& m, int level, int64_t flat);
int64_t cube_flat(const SpaceModel& m, const Cube& c);
// Unique sortable key over all levels.
uint64_t cube_key(const SpaceModel& m, const Cube& c);

double cube_side(const Cube& c);
double cube_measure(const SpaceModel& m, const Cube& c);
int64_t cube_cells(const SpaceModel& m, const Cube& c);  // cell count
std::array<double, kMaxDim> cube_center(const SpaceModel& m, const Cube& c);
Cube cube_ancestor(const Cube& c, int level);
std::vector<Cube> cube_children(const SpaceModel& m, const Cube& c);
bool cube_contains(const Cube& outer, const Cube& inner);
bool cube_contains_cell(const SpaceModel& m, const Cube& c, int64_t cell);
Region cube_region(const SpaceModel& m, const Cube& c);
void cube_add_to_region(const SpaceModel& m, const Cube& c, Region& r);
// d(A, y) from cell centers of A to the cell center y, in the model metric.
double cube_cell_distance(const SpaceModel& m, const Cube& c, int64_t cell);

// A certified dyadic cube hierarchy on a model, with the usual constants:
// ball sandwich B(m_A, C_1 q^n) <= A <= B(m_A, C_2 q^n), boundary-layer
// exponent eta and factor C_3, and child bound N.
struct DyadicSystem {
  SpaceModel model;
  double C_1 = 0.5;
  double C_2 = 1.0;
  double C_3 = 2.0;
  double eta = 1.0;
  int N = 2;
};

struct CubeReport {
  bool ok = true;
  std::vector<std::string> violations;
  // Constants the exhaustive suite certified.
  double C_1 = 0, C_2 = 0, C_3 = 0, eta = 0;
  int N = 0;
};

// Construction is canonical on the torus; the returned constants are the ones
// the exhaustive suite certifies (build throws if certification fails).
DyadicSystem build_system(const SpaceModel& model);

// The full eight-property suite at the model's depth (partition, nesting,
// unique ancestor, ball sandwich, boundary layers, countability, child
// bounds, exact covering).  Used by build_system and the CLI.
CubeReport verify_system(const DyadicSystem& sys);

// r <> A: all finest cells strictly within r q^lev(A) of A.  Contains A.
Region diamond(const DyadicSystem& sys, const Cube& a, double r);

// Cells of A within t q^lev(A) of the complement (closed inequality).
Region boundary_layer(const DyadicSystem& sys, const Cube& a, double t);

struct DiamondIntersection {
  bool intersects = false;
  double r = 0.0;              // 2 K^3 (C_2 + r2) q^(lev2-lev1) + K r1
  bool inclusion_verified = false;
};

// Requires lev(a2) >= lev(a1); callers swap otherwise.
DiamondIntersection diamond_intersection_bound(const DyadicSystem& sys,
                                               const Cube& a1, const Cube& a2,
                                               double r1, double r2);

}  // namespace adgrid
