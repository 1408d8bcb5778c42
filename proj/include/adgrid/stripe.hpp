#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adgrid/cubes.hpp"
#include "adgrid/haar.hpp"
#include "adgrid/model.hpp"
#include "adgrid/region.hpp"

namespace adgrid {

// Partition of each cube's lambda-deep descendants into M comparable slabs.
// The classical family slabs along axis 0; explicit tables exist so the
// verifier's violation paths stay testable.
struct StripeFamily {
  int lambda = 1;
  int M = 2;
  bool classical = true;
  double eps = 1.0;  // decay exponent used by the (S4) certificate
  // kept only for fixtures: cube key -> per-stripe cube lists
  std::map<uint64_t, std::vector<std::vector<Cube>>> table;
};

StripeFamily make_classical_stripes(const DyadicSystem& sys, int lambda);

// Stripe m (1-based) of A: cubes at level lev A + lambda.  Requires
// lev A + lambda <= J.
std::vector<Cube> stripe_cubes(const DyadicSystem& sys, const StripeFamily& fam,
                               const Cube& a, int m);
Region stripe_region(const DyadicSystem& sys, const StripeFamily& fam,
                     const Cube& a, int m);

struct StripeReport {
  bool ok = true;
  std::vector<std::string> violations;
  double K1 = 0.0;  // smallest working comparability constant
  double K2 = 0.0;  // smallest working (S4) factor at the family exponent
  double eps = 0.0;
};

// (S1) partition, (S2) comparability, (S3) nestedness per stripe index,
// (S4) coarse-cube overlap decay; exhaustive over all cubes with
// lev + lambda <= J.
StripeReport verify_S1_S4(const DyadicSystem& sys, const StripeFamily& fam);

struct StripeFunctions {
  StripeFamily family;
  double C_g = 1.0;  // certified (G3) constant
};

// g = sum of Haar functions over a stripe; certifies (G1)-(G3).
StripeFunctions make_stripe_functions(const DyadicSystem& sys, const StripeFamily& fam,
                                      const HaarSystem& haar);

CellFunction stripe_g(const DyadicSystem& sys, const StripeFunctions& fns,
                      const HaarSystem& haar, const Cube& a, int m);

struct OverlapBound {
  double lhs_measure = 0.0;
  double rhs_bound = 0.0;
  double K3 = 0.0;
  bool ok = true;
};

// Overlap of one stripe with all stripes hanging off coarser cubes at levels
// lev A + d*k_gap (1 <= d*k_gap <= lambda-1), against the geometric bound.
OverlapBound overlap_bound(const DyadicSystem& sys, const StripeFamily& fam,
                           const Cube& a, int m, int n, int k_gap);

struct LevelSetBound {
  double level_set_measure = 0.0;
  double bound = 0.0;
  bool ok = true;
};

// Measure of {|g^(n)| >= ||g^(m)||_inf / (2 C_g)} against |S^(n)*| / (2 C_g^2).
LevelSetBound stripe_function_lowerbound(const DyadicSystem& sys,
                                         const StripeFunctions& fns,
                                         const HaarSystem& haar, const Cube& a,
                                         int m, int n);

// Carrier sets of the two-stripe comparison: per selected cube, the pair of
// stripes minus every finer carrier of the same residue class.
struct StripeCarriers {
  int m = 1, n = 2;
  int nu = 0, delta = 0, k_gap = 1;
  std::vector<Cube> cubes;
  std::vector<Region> carrier;
  bool nested = true;
  bool retention_ok = true;   // carrier keeps >= (1 - 1/(4 C_g^2)) of stripe n
  double worst_retention = 1.0;
  Filtration carriers_filtration;  // from the carrier sets
  Filtration stripes_filtration;   // from the stripe-m unions
};

// k_gap = 0 selects the smallest k with K3(k) q^(k eps) <= 1/(4 C_g^2).
StripeCarriers build_stripe_carriers(const DyadicSystem& sys, const StripeFunctions& fns,
                                     const HaarSystem& haar, int m, int n, int nu,
                                     int delta, int k_gap = 0);

int carrier_k_gap(const DyadicSystem& sys, const StripeFamily& fam, double C_g);

// Linear extension h_A -> g^(m)_A over the given cubes.
CellFunction apply_stripe_operator(const DyadicSystem& sys, const StripeFunctions& fns,
                                   const HaarSystem& haar, std::span<const Cube> cubes,
                                   std::span<const double> coeffs, int m);

std::string stripe_family_to_json(const DyadicSystem& sys, const StripeFamily& fam);

}  // namespace adgrid
