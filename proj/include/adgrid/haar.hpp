#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adgrid/cubes.hpp"
#include "adgrid/model.hpp"
#include "adgrid/region.hpp"

namespace adgrid {

// A function on X, constant on finest cells.
struct CellFunction {
  SpaceModel model;
  std::vector<double> v;

  static CellFunction zero(const SpaceModel& m) {
    return CellFunction{m, std::vector<double>(static_cast<size_t>(m.cell_count()), 0.0)};
  }
};

double norm_p(const CellFunction& f, double p);
double norm_inf(const CellFunction& f);
double integral(const CellFunction& f);
double inner_product(const CellFunction& f, const CellFunction& g);  // measure weighted

enum class SignScheme : uint8_t { FirstHalf };

// One mean-zero +-1 function per cube of level < J, supported on the cube:
// the children are split into two halves along axis (level mod k).
struct HaarSystem {
  DyadicSystem sys;
  SignScheme scheme = SignScheme::FirstHalf;
};

HaarSystem make_haar(const DyadicSystem& sys, SignScheme scheme = SignScheme::FirstHalf);

// +1 / -1 on the cube's halves, 0 outside.
int haar_sign(const HaarSystem& h, const Cube& a, int64_t cell);
// f += c * h_A
void haar_add(const HaarSystem& h, const Cube& a, double c, CellFunction& f);
CellFunction haar_function(const HaarSystem& h, const Cube& a);

// f = sum_i coeffs[i] h_{family[i]}
CellFunction synthesize(const HaarSystem& h, std::span<const Cube> family,
                        std::span<const double> coeffs);
// integral of f * h_A (unnormalized pairing)
double haar_integral(const HaarSystem& h, const Cube& a, const CellFunction& f);
// coeffs[i] = <f, h_i> with the inner product normalized so <h,h> = 1,
// i.e. (integral of f*h) / |cube|.
std::vector<double> analyze(const HaarSystem& h, std::span<const Cube> family,
                            const CellFunction& f);

// --- filtrations -------------------------------------------------------------

struct SigmaAlgebra {
  std::vector<Region> atoms;  // pairwise disjoint
  Region remainder;           // X minus the union (may be empty)
};

struct Filtration {
  SpaceModel model;
  std::vector<int> levels;            // sorted, distinct
  std::vector<SigmaAlgebra> stages;   // one per level

  // Stage for exactly this level; throws if the level does not exist.
  const SigmaAlgebra& at_level(int n) const;
  bool has_level(int n) const;
};

// Sigma algebras generated by the members of a nested family having level <= n,
// one stage per occupied level.
Filtration make_filtration(const SpaceModel& m,
                           const std::vector<std::pair<int, Region>>& nested_family);
// Stages sigma(Q_0), ..., sigma(Q_max) of the dyadic filtration.
Filtration make_dyadic_filtration(const SpaceModel& m, int max_level);

CellFunction conditional_expectation(const CellFunction& f, const SigmaAlgebra& s);
CellFunction conditional_expectation(const CellFunction& f, const Filtration& filt, int n);

// CSV export: "cell,value" rows.
void export_csv(const CellFunction& f, const std::string& path);

}  // namespace adgrid
