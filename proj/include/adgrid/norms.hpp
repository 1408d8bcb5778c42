#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adgrid/haar.hpp"
#include "adgrid/shift.hpp"
#include "adgrid/stripe.hpp"

namespace adgrid {

// Evaluable linear map between spans of the Haar family: each domain cube
// carries either a Haar image cube (with a common scale), a stripe image, or
// nothing.
struct OperatorHandle {
  DyadicSystem sys;
  HaarSystem haar;
  std::vector<Cube> domain;                   // basis cubes of the domain span
  std::vector<std::optional<Cube>> image;     // Haar image per entry, nullopt -> 0
  double scale = 1.0;
  std::optional<StripeFunctions> stripe;      // set: image is g^(stripe_m)
  int stripe_m = 1;
  std::string descriptor;                     // seeds and reports
};

OperatorHandle make_shift_operator(const DyadicSystem& sys, const HaarSystem& haar,
                                   const ShiftRelation& tau, int tau_index = 0);
// Restriction to one (color, level-residue) class of a decomposition.
OperatorHandle make_class_operator(const DyadicSystem& sys, const HaarSystem& haar,
                                   const ShiftDecomposition& dec, int color, int i);
OperatorHandle make_stripe_operator_handle(const DyadicSystem& sys, const HaarSystem& haar,
                                           const StripeFunctions& fns, int m);
OperatorHandle make_scaled_identity(const DyadicSystem& sys, const HaarSystem& haar,
                                    std::vector<Cube> family, double scale);

CellFunction apply_operator(const OperatorHandle& op, std::span<const double> coeffs);
CellFunction apply_domain(const OperatorHandle& op, std::span<const double> coeffs);
// Unnormalized inner products of a function with every image basis function.
std::vector<double> image_adjoint(const OperatorHandle& op, const CellFunction& f);
// Coefficients of the orthogonal projection onto the domain span.
std::vector<double> domain_analyze(const OperatorHandle& op, const CellFunction& f);

struct NormEstimate {
  double p = 2.0;
  double value = 0.0;
  enum class Kind : uint8_t { Exact2, LowerBound } kind = Kind::Exact2;
  int restarts = 0;
  int iterations = 0;
  double residual = 0.0;
  uint64_t seed = 0;
  bool converged = true;
  std::vector<double> witness;  // domain coefficients realizing `value`
};

// Largest singular value of the map on the domain span under the measure
// weighted inner product: power iteration on the normal operator, relative
// tolerance 1e-10, deterministic start plus random restarts.
NormEstimate opnorm_exact_2(const OperatorHandle& op, int restarts = 4,
                            uint64_t seed = 0, int max_iter = 20000);

// Certified lower bound on the L^p -> L^p norm over the domain span: the
// value is ||T f||_p / ||f||_p for the reported witness coefficients.
NormEstimate opnorm_lower_p(const OperatorHandle& op, double p, int restarts = 4,
                            uint64_t seed = 0, int max_iter = 500);

// Recompute ||T f||_p / ||f||_p for given coefficients through the plain
// evaluation path (soundness checks).
double witness_ratio(const OperatorHandle& op, std::span<const double> coeffs, double p);

// Crude triangle-inequality upper bound; every lower bound must stay below it.
double coefficientwise_upper_bound(const OperatorHandle& op, double p);

uint64_t norm_seed(const std::string& descriptor, double p, int restart);

// --- experiment curves --------------------------------------------------------

struct ShiftNormRow {
  int64_t m = 0;
  std::string cls;  // "full" or "j<color>i<residue>"
  double p = 2.0;
  double norm = 0.0;
  std::string kind;
  int ell = 0;
  int M_k = 0;
};

struct ShiftCurveOptions {
  double C_R = 4.0;
  bool include_classes = false;
  int restarts = 2;
  uint64_t seed = 0;
  int axis = 0;
};

std::vector<ShiftNormRow> shift_norm_curve(const DyadicSystem& sys, const HaarSystem& haar,
                                           std::span<const int64_t> m_list, double p,
                                           const ShiftCurveOptions& opt);

struct StripeNormRow {
  int lambda = 1;
  int M = 2;
  double p = 2.0;
  double norm = 0.0;
  std::string kind;
  double envelope_lo = 0.0;  // M^(-1/min(2,p))
  double envelope_hi = 0.0;  // M^(-1/max(2,p))
};

std::vector<StripeNormRow> stripe_norm_curve(const DyadicSystem& sys, const HaarSystem& haar,
                                             std::span<const int> lambda_list, double p,
                                             int restarts = 2, uint64_t seed = 0);

}  // namespace adgrid
