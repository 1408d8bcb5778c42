#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adgrid/adapt.hpp"
#include "adgrid/cubes.hpp"
#include "adgrid/haar.hpp"
#include "adgrid/region.hpp"

namespace adgrid {

struct CubePair {
  Cube P, Q;  // lev P == lev Q
  bool operator==(const CubePair&) const = default;
};

// Level-preserving rearrangement relation, partitioned into bijective pieces.
struct ShiftRelation {
  std::vector<CubePair> pairs;
  double m_param = 0.0;   // certified radius: Q inside (m_param <> P)
  double shift_m = 0.0;   // generating shift amount, in cells of the pair level
  std::vector<std::vector<int>> partition;  // pair indices per bijective piece
  bool axis_shift = false;  // generated by make_axis_shift
  int axis = 0;
  int64_t m_cells = 0;
};

// Pairs (P, P shifted by m cells along `axis`, torus wrap) for every level in
// [level_lo, level_hi].  Bijective per level, so the partition is a single
// piece; the certified radius is m + 1 (the farthest cell of the image sits
// at set distance exactly m cells and diamonds are open).
ShiftRelation make_axis_shift(const DyadicSystem& sys, int64_t m, int axis,
                              int level_lo, int level_hi);

// General pair list: validates levels, certifies the smallest usable radius,
// and greedily splits into bijective pieces.
ShiftRelation make_relation(const DyadicSystem& sys, std::vector<CubePair> pairs);

struct RelationReport {
  bool ok = true;
  std::vector<std::string> violations;
  double m_param = 0.0;
  double C_h = 0.0;  // certified sup-vs-average constant for the Haar pair bound
};

// (P1)/(P2)/(H2)/(H3) certificates for a relation against a Haar system.
RelationReport certify_relation(const DyadicSystem& sys, const HaarSystem& haar,
                                const ShiftRelation& tau);

// Colored decomposition of one bijective piece: same-level members of one
// color class have all four cross diamonds (A_i, image(A_i)) disjoint at the
// given radius; level classes slice colors by level mod ell.
struct ShiftDecomposition {
  ShiftRelation tau;
  int tau_index = 0;
  double conflict_radius = 4.0;  // radius used for the coloring
  double C_R = 4.0;              // radius certified/date for separation checks
  int ell = 1;
  int M_k = 0;  // colors used
  std::vector<int> color;  // per pair index of the chosen piece
  // classes[j][i] = pair indices of color j with level == i (mod ell)
  std::vector<std::vector<std::vector<int>>> classes;
};

ShiftDecomposition decompose(const DyadicSystem& sys, const ShiftRelation& tau,
                             double C_R, int ell, int tau_index = 0,
                             double conflict_radius = 0.0 /* default: C_R */);

// Pairs of the class whose P or Q is strictly inside A.
std::vector<int> psi_pairs(const DyadicSystem& sys, const ShiftDecomposition& dec,
                           int color, int i, const Cube& a);

struct LocalizationReport {
  bool ok = true;
  double c1 = 0.0;       // 2 K^3 (C_2 + 1)
  double radius = 0.0;   // c1 (1 + m) q^ell, the diamond scale checked
  std::vector<std::string> violations;
};

// For every class member A and every pair attached to it, P u Q lies in the
// (c1 (1+m) q^ell) diamond of A, cell-exactly.  radius_scale shrinks the
// diamond for fault-injection tests.
LocalizationReport check_localization(const DyadicSystem& sys,
                                      const ShiftDecomposition& dec,
                                      double radius_scale = 1.0);

// The three admissibility constraints on the decomposition scale, collapsed
// to the largest usable beta; ell for a shift amount m is the smallest
// integer with (1 + m) q^ell <= beta.
double beta_constant(const DyadicSystem& sys, double C_R);
int ell_for_shift(const DyadicSystem& sys, double C_R, double m);
// Conflict radius that keeps the nested supports of distinct same-level class
// pairs disjoint: 2 K C_R + 2 K^4 beta.
double theta_conflict_radius(const DyadicSystem& sys, double C_R);

// Nested supports carrying the pairs of one class: per pair, the union of the
// two adapted regions plus every finer support meeting it.
struct ThetaSupports {
  std::vector<int> pair_indices;   // into tau.pairs
  std::vector<Region> support;     // same order
  double c3 = 0.0;                 // diamond radius of the inclusion certificate
  double c4_bound = 0.0;           // measure factor implied by the c3 diamonds
  double c4_star = 0.0;            // achieved max |support| / (|P| + |Q|)
  bool nested = true;
  bool cover_ok = true;            // P u Q inside the support
  bool inclusion_ok = true;        // support inside c3<>P u c3<>Q
  bool grids_ok = true;            // both adapted grids verified
};

// The two adapted-grid inputs used for one class (domain side and image side).
std::pair<AdaptInput, AdaptInput> theta_grid_inputs(const DyadicSystem& sys,
                                                    const ShiftDecomposition& dec,
                                                    int color, int i, double C_R);

ThetaSupports build_theta(const DyadicSystem& sys, const ShiftDecomposition& dec,
                          int color, int i, double C_R);

struct DominationReport {
  bool ok = true;
  bool atoms_ok = true;
  double c5_star = 0.0;   // smallest working constant observed
  double c5_bound = 0.0;  // 2 C_h c4
  std::vector<std::string> violations;
};

// Pointwise |h_{image(A)}| <= c5 E(|h_A| | F_lev A) on every finest cell, with
// the filtration generated by the supports of level <= lev A.
DominationReport domination_check(const DyadicSystem& sys, const ShiftDecomposition& dec,
                                  int color, int i, const ThetaSupports& theta,
                                  const HaarSystem& haar);

std::string relation_to_json(const DyadicSystem& sys, const ShiftRelation& tau);
std::string decomposition_to_json(const DyadicSystem& sys, const ShiftDecomposition& dec);

}  // namespace adgrid
