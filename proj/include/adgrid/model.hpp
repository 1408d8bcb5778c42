#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adgrid {

// Discretized model spaces: the k-torus at resolution 2^-J, carrying either
// the sup quasimetric or (k = 1) the squared torus metric.  Everything
// downstream works on the lattice of finest-cell centers, so all distances
// that matter are dyadic rationals and compare exactly in double precision.

enum class Kind : uint8_t { TorusSup, TorusSquared };

inline constexpr int kMaxDim = 3;

struct SpaceModel {
  Kind kind = Kind::TorusSup;
  int k = 1;           // dimension
  int J = 1;           // finest cells have side 2^-J
  double K_X = 1.0;    // quasitriangle constant
  double C_d = 2.0;    // doubling constant
  double q = 0.5;      // level scale factor

  int64_t cells_per_axis() const { return int64_t{1} << J; }
  int64_t cell_count() const;
  double cell_side() const { return 1.0 / static_cast<double>(cells_per_axis()); }
  // Lebesgue measure of one finest cell, (2^-J)^k.
  double cell_measure() const;
  // Largest point distance realizable on this torus (diameter in d).
  double diameter() const;

  bool operator==(const SpaceModel&) const = default;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SpaceModel make_model(Kind kind, int k, int J);

// Quasidistance between arbitrary torus points (coordinates in [0,1)).
double quasidistance(const SpaceModel& m, std::span<const double> x,
                     std::span<const double> y);

// --- cell-lattice fast paths -----------------------------------------------
// Cells are indexed axis-major: cell = x0 + 2^J*(x1 + 2^J*x2).

std::array<int64_t, kMaxDim> cell_coords(const SpaceModel& m, int64_t cell);
int64_t cell_index(const SpaceModel& m, std::span<const int64_t> coords);
std::array<double, kMaxDim> cell_center(const SpaceModel& m, int64_t cell);

// Cyclic distance |a-b| on Z/2^J, in cell units.
int64_t torus_gap(const SpaceModel& m, int64_t a, int64_t b);

// d between two cell centers.
double cell_distance(const SpaceModel& m, int64_t ci, int64_t cj);

// d from a cell center to an arbitrary point.
double cell_point_distance(const SpaceModel& m, int64_t cell,
                           std::span<const double> y);

// --- model certification ----------------------------------------------------

struct ModelReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Quasitriangle d(x,y) <= K_X (d(x,z)+d(z,y)) over cell-center triples:
// exhaustive when the cell count is small, otherwise `samples` random triples.
ModelReport verify_quasimetric(const SpaceModel& m, uint64_t samples = 100000,
                               uint64_t seed = 1);

// Doubling |B(x,2r)| <= C_d |B(x,r)| by closed-ball cell counting over all
// centers and radii r in {q^J, ..., q} (dyadic; open balls undercount one
// cell per side and miss the bound by exactly that cell).
ModelReport verify_doubling(const SpaceModel& m);

}  // namespace adgrid
