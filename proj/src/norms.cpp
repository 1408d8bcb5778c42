#include "adgrid/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

namespace adgrid {

namespace {

double cube_abs_integral(const SpaceModel& m, const Cube& c) { return cube_measure(m, c); }

std::vector<double> domain_gram_diag(const OperatorHandle& op) {
  std::vector<double> d(op.domain.size());
  for (size_t i = 0; i < d.size(); ++i) d[i] = cube_measure(op.sys.model, op.domain[i]);
  return d;
}

double signed_pow(double x, double e) {
  if (x == 0.0) return 0.0;
  double a = std::fabs(x);
  double r;
  if (e == 1.0)
    r = a;
  else if (e == 2.0)
    r = a * a;
  else if (e == 3.0)
    r = a * a * a;
  else if (e == 0.5)
    r = std::sqrt(a);
  else if (e == 1.0 / 3.0)
    r = std::cbrt(a);
  else
    r = std::pow(a, e);
  return x < 0.0 ? -r : r;
}

}  // namespace

OperatorHandle make_shift_operator(const DyadicSystem& sys, const HaarSystem& haar,
                                   const ShiftRelation& tau, int tau_index) {
  OperatorHandle op;
  op.sys = sys;
  op.haar = haar;
  const auto& piece = tau.partition.at(static_cast<size_t>(tau_index));
  for (int idx : piece) {
    op.domain.push_back(tau.pairs[static_cast<size_t>(idx)].P);
    op.image.emplace_back(tau.pairs[static_cast<size_t>(idx)].Q);
  }
  op.descriptor = "shift:m=" + std::to_string(tau.shift_m) + ":k=" + std::to_string(tau_index);
  return op;
}

OperatorHandle make_class_operator(const DyadicSystem& sys, const HaarSystem& haar,
                                   const ShiftDecomposition& dec, int color, int i) {
  OperatorHandle op;
  op.sys = sys;
  op.haar = haar;
  for (int idx : dec.classes.at(static_cast<size_t>(color)).at(static_cast<size_t>(i))) {
    op.domain.push_back(dec.tau.pairs[static_cast<size_t>(idx)].P);
    op.image.emplace_back(dec.tau.pairs[static_cast<size_t>(idx)].Q);
  }
  op.descriptor = "shift:m=" + std::to_string(dec.tau.shift_m) + ":j=" + std::to_string(color) +
                  ":i=" + std::to_string(i);
  return op;
}

OperatorHandle make_stripe_operator_handle(const DyadicSystem& sys, const HaarSystem& haar,
                                           const StripeFunctions& fns, int m) {
  OperatorHandle op;
  op.sys = sys;
  op.haar = haar;
  op.stripe = fns;
  op.stripe_m = m;
  for (int lv = 0; lv + fns.family.lambda < sys.model.J; ++lv)
    for (int64_t f = 0; f < cubes_at_level(sys.model, lv); ++f) {
      op.domain.push_back(cube_from_flat(sys.model, lv, f));
      op.image.emplace_back(std::nullopt);
    }
  op.descriptor = "stripe:lambda=" + std::to_string(fns.family.lambda) + ":m=" + std::to_string(m);
  return op;
}

OperatorHandle make_scaled_identity(const DyadicSystem& sys, const HaarSystem& haar,
                                    std::vector<Cube> family, double scale) {
  OperatorHandle op;
  op.sys = sys;
  op.haar = haar;
  op.domain = std::move(family);
  for (const Cube& c : op.domain) op.image.emplace_back(c);
  op.scale = scale;
  op.descriptor = "scaled_identity:" + std::to_string(scale);
  return op;
}

CellFunction apply_operator(const OperatorHandle& op, std::span<const double> coeffs) {
  if (coeffs.size() != op.domain.size()) throw ModelError("apply_operator: size mismatch");
  CellFunction out = CellFunction::zero(op.sys.model);
  if (op.stripe) {
    for (size_t i = 0; i < op.domain.size(); ++i) {
      if (coeffs[i] == 0.0) continue;
      for (const Cube& r : stripe_cubes(op.sys, op.stripe->family, op.domain[i], op.stripe_m))
        haar_add(op.haar, r, op.scale * coeffs[i], out);
    }
    return out;
  }
  for (size_t i = 0; i < op.domain.size(); ++i) {
    if (coeffs[i] == 0.0 || !op.image[i]) continue;
    haar_add(op.haar, *op.image[i], op.scale * coeffs[i], out);
  }
  return out;
}

CellFunction apply_domain(const OperatorHandle& op, std::span<const double> coeffs) {
  return synthesize(op.haar, op.domain, coeffs);
}

std::vector<double> image_adjoint(const OperatorHandle& op, const CellFunction& f) {
  std::vector<double> out(op.domain.size(), 0.0);
  if (op.stripe) {
    for (size_t i = 0; i < op.domain.size(); ++i) {
      double s = 0.0;
      for (const Cube& r : stripe_cubes(op.sys, op.stripe->family, op.domain[i], op.stripe_m))
        s += haar_integral(op.haar, r, f);
      out[i] = op.scale * s;
    }
    return out;
  }
  for (size_t i = 0; i < op.domain.size(); ++i)
    if (op.image[i]) out[i] = op.scale * haar_integral(op.haar, *op.image[i], f);
  return out;
}

std::vector<double> domain_analyze(const OperatorHandle& op, const CellFunction& f) {
  return analyze(op.haar, op.domain, f);
}

uint64_t norm_seed(const std::string& descriptor, double p, int restart) {
  // FNV-1a over the descriptor, the exponent bits and the restart index.
  uint64_t h = 1469598103934665603ull;
  auto mix = [&](uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (char c : descriptor) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  uint64_t pb;
  static_assert(sizeof(double) == sizeof(uint64_t));
  std::memcpy(&pb, &p, sizeof pb);
  mix(pb);
  mix(static_cast<uint64_t>(restart));
  return h;
}

NormEstimate opnorm_exact_2(const OperatorHandle& op, int restarts, uint64_t seed,
                            int max_iter) {
  NormEstimate est;
  est.p = 2.0;
  est.kind = NormEstimate::Kind::Exact2;
  est.restarts = restarts;
  const size_t n = op.domain.size();
  if (n == 0) return est;
  std::vector<double> d = domain_gram_diag(op);
  std::vector<double> dsq(n);
  for (size_t i = 0; i < n; ++i) dsq[i] = std::sqrt(d[i]);

  // u -> D^{-1/2} S_img^T W S_img D^{-1/2} u, symmetric PSD on coefficients.
  auto matvec = [&](const std::vector<double>& u) {
    std::vector<double> c(n);
    for (size_t i = 0; i < n; ++i) c[i] = u[i] / dsq[i];
    CellFunction y = apply_operator(op, c);
    std::vector<double> b = image_adjoint(op, y);
    for (size_t i = 0; i < n; ++i) b[i] /= dsq[i];
    return b;
  };

  double best = 0.0;
  std::vector<double> best_u;
  int total_iters = 0;
  bool converged_all = true;
  double last_res = 0.0;
  for (int r = 0; r <= restarts; ++r) {
    std::vector<double> u(n, 1.0);
    if (r > 0) {
      std::mt19937_64 rng(seed ? seed + static_cast<uint64_t>(r)
                               : norm_seed(op.descriptor, 2.0, r));
      std::normal_distribution<double> g(0.0, 1.0);
      for (auto& x : u) x = g(rng);
    }
    double nu = 0.0;
    for (double x : u) nu += x * x;
    nu = std::sqrt(nu);
    if (nu == 0.0) continue;
    for (auto& x : u) x /= nu;
    double lambda = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
      std::vector<double> v = matvec(u);
      double nl = 0.0;
      for (size_t i = 0; i < n; ++i) nl += u[i] * v[i];  // Rayleigh quotient
      double nv = 0.0;
      for (double x : v) nv += x * x;
      nv = std::sqrt(nv);
      if (nv == 0.0) {
        lambda = 0.0;
        converged = true;
        break;
      }
      for (auto& x : v) x /= nv;
      double rel = std::fabs(nl - lambda) / std::max(std::fabs(nl), 1e-300);
      last_res = rel;
      lambda = nl;
      u = std::move(v);
      if (it > 0 && rel <= 1e-10) {
        converged = true;
        break;
      }
    }
    total_iters += it;
    if (!converged) converged_all = false;
    if (lambda > best) {
      best = lambda;
      best_u = u;
    }
  }
  est.iterations = total_iters;
  est.converged = converged_all;
  est.residual = last_res;
  est.value = std::sqrt(std::max(0.0, best));
  est.seed = seed ? seed : norm_seed(op.descriptor, 2.0, 0);
  if (!best_u.empty()) {
    est.witness.resize(n);
    for (size_t i = 0; i < n; ++i) est.witness[i] = best_u[i] / dsq[i];
  }
  return est;
}

NormEstimate opnorm_lower_p(const OperatorHandle& op, double p, int restarts,
                            uint64_t seed, int max_iter) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ModelError("p must lie in (1, inf)");
  NormEstimate est;
  est.p = p;
  est.kind = NormEstimate::Kind::LowerBound;
  est.restarts = restarts;
  const size_t n = op.domain.size();
  if (n == 0) return est;
  const double pdual = p / (p - 1.0);
  std::vector<double> d = domain_gram_diag(op);

  // The ratio ||T f||_p / ||f||_p for f in the domain span, with coefficients
  // normalized so the denominator is 1.
  auto ratio = [&](std::vector<double>& c) {
    CellFunction f = apply_domain(op, c);
    double nf = norm_p(f, p);
    if (nf == 0.0) return -1.0;
    for (auto& x : c) x /= nf;
    CellFunction y = apply_operator(op, c);
    return norm_p(y, p);
  };

  double best = 0.0;
  std::vector<double> best_witness;
  int total_iters = 0;
  double last_res = 0.0;
  bool converged_all = true;
  for (int r = 0; r <= restarts; ++r) {
    uint64_t rs = seed ? seed + static_cast<uint64_t>(r) : norm_seed(op.descriptor, p, r);
    std::vector<double> c(n, 1.0);
    if (r > 0) {
      std::mt19937_64 rng(rs);
      std::normal_distribution<double> g(0.0, 1.0);
      for (auto& x : c) x = g(rng);
    }
    double restart_best = -1.0;
    std::vector<double> restart_witness;
    double prev = -1.0;
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
      CellFunction f = apply_domain(op, c);
      double nf = norm_p(f, p);
      if (nf == 0.0) break;
      for (auto& x : c) x /= nf;
      for (auto& x : f.v) x /= nf;
      CellFunction y = apply_operator(op, c);
      double val = norm_p(y, p);
      if (val > restart_best) {
        restart_best = val;
        restart_witness = c;
      }
      double rel = std::fabs(val - prev) / std::max(val, 1e-300);
      last_res = rel;
      if (prev >= 0.0 && rel <= 1e-7) {
        prev = val;
        converged = true;
        break;
      }
      prev = val;
      if (val == 0.0) break;
      // dual-exponent signed power, adjoint, dual map back, project to span
      for (auto& x : y.v) x = signed_pow(x, p - 1.0);
      std::vector<double> b = image_adjoint(op, y);
      for (size_t i = 0; i < n; ++i) b[i] /= d[i];
      CellFunction w = apply_domain(op, b);
      for (auto& x : w.v) x = signed_pow(x, pdual - 1.0);
      c = domain_analyze(op, w);
      double nc = 0.0;
      for (double x : c) nc += x * x;
      if (nc == 0.0) break;
    }
    total_iters += it;
    if (!converged && it == max_iter) converged_all = false;

    // Ascent polish: the fixed point above optimizes the composite map over
    // all of L^p, which can sit below the span-restricted maximum.  Climb the
    // true in-span ratio from the iterate until it is stationary.
    if (restart_best > 0.0 && !restart_witness.empty()) {
      std::vector<double> cc = restart_witness;
      double val = ratio(cc);
      for (int step = 0; step < 200 && val > 0.0; ++step) {
        CellFunction f = apply_domain(op, cc);
        CellFunction y = apply_operator(op, cc);
        double na = norm_p(y, p), nb = norm_p(f, p);
        if (na == 0.0 || nb == 0.0) break;
        for (auto& x : y.v) x = signed_pow(x, p - 1.0);
        std::vector<double> ga = image_adjoint(op, y);
        for (auto& x : f.v) x = signed_pow(x, p - 1.0);
        std::vector<double> gb = domain_analyze(op, f);
        double napow = std::pow(na, p), nbpow = std::pow(nb, p);
        double gnorm = 0.0, cnorm = 0.0;
        std::vector<double> grad(n);
        for (size_t i = 0; i < n; ++i) {
          // domain_analyze divides by |P|; undo it for the plain pairing
          grad[i] = ga[i] / napow - gb[i] * d[i] / nbpow;
          gnorm += grad[i] * grad[i];
          cnorm += cc[i] * cc[i];
        }
        if (gnorm <= 1e-30 * std::max(1.0, cnorm)) break;
        double eta = std::sqrt(cnorm / gnorm);
        bool improved = false;
        double gain = 0.0;
        for (int bt = 0; bt < 25; ++bt, eta *= 0.25) {
          std::vector<double> trial(n);
          for (size_t i = 0; i < n; ++i) trial[i] = cc[i] + eta * grad[i];
          double tval = ratio(trial);
          if (tval > val) {
            gain = tval - val;
            cc = std::move(trial);
            val = tval;
            improved = true;
            break;
          }
        }
        ++total_iters;
        if (!improved || gain <= val * 1e-12) break;
      }
      if (val > restart_best) {
        restart_best = val;
        restart_witness = cc;
      }
    }
    if (restart_best > best) {
      best = restart_best;
      best_witness = restart_witness;
    }
  }
  est.value = best;
  est.witness = std::move(best_witness);
  est.iterations = total_iters;
  est.residual = last_res;
  est.converged = converged_all;
  est.seed = seed ? seed : norm_seed(op.descriptor, p, 0);
  return est;
}

double witness_ratio(const OperatorHandle& op, std::span<const double> coeffs, double p) {
  // Plain evaluation path: per-cell signs over cube regions rather than the
  // synthesis windows, so soundness checks do not share the iteration's code.
  const SpaceModel& m = op.sys.model;
  auto add_haar = [&](const Cube& cube, double c, CellFunction& into) {
    cube_region(m, cube).for_each([&](int64_t cell) {
      into.v[static_cast<size_t>(cell)] +=
          c * static_cast<double>(haar_sign(op.haar, cube, cell));
    });
  };
  CellFunction f = CellFunction::zero(m);
  for (size_t i = 0; i < op.domain.size(); ++i)
    if (coeffs[i] != 0.0) add_haar(op.domain[i], coeffs[i], f);
  CellFunction g = CellFunction::zero(m);
  for (size_t i = 0; i < op.domain.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    if (op.stripe) {
      for (const Cube& r : stripe_cubes(op.sys, op.stripe->family, op.domain[i], op.stripe_m))
        add_haar(r, op.scale * coeffs[i], g);
    } else if (op.image[i]) {
      add_haar(*op.image[i], op.scale * coeffs[i], g);
    }
  }
  double nf = norm_p(f, p);
  if (nf == 0.0) throw ModelError("witness has zero norm");
  return norm_p(g, p) / nf;
}

double coefficientwise_upper_bound(const OperatorHandle& op, double p) {
  // ||T f|| <= sum_P |c_P| ||T h_P|| and |c_P| <= ||f|| ||h_P||_p' / |P|.
  const SpaceModel& m = op.sys.model;
  double pdual = p / (p - 1.0);
  double total = 0.0;
  for (size_t i = 0; i < op.domain.size(); ++i) {
    std::vector<double> e(op.domain.size(), 0.0);
    e[i] = 1.0;
    CellFunction t = apply_operator(op, e);
    double hp = std::pow(cube_abs_integral(m, op.domain[i]), 1.0 / pdual);
    total += hp * norm_p(t, p) / cube_measure(m, op.domain[i]);
  }
  return total;
}

std::vector<ShiftNormRow> shift_norm_curve(const DyadicSystem& sys, const HaarSystem& haar,
                                           std::span<const int64_t> m_list, double p,
                                           const ShiftCurveOptions& opt) {
  const SpaceModel& mod = sys.model;
  std::vector<ShiftNormRow> rows;
  for (int64_t m : m_list) {
    ShiftRelation tau = make_axis_shift(sys, m, opt.axis, 0, mod.J - 1);
    int ell = ell_for_shift(sys, opt.C_R, static_cast<double>(m));
    if (ell > mod.J - 1) throw ModelError("depth insufficient for the required ell");
    OperatorHandle full = make_shift_operator(sys, haar, tau);
    NormEstimate fe = p == 2.0 ? opnorm_exact_2(full, 4, opt.seed)
                               : opnorm_lower_p(full, p, opt.restarts, opt.seed);
    ShiftNormRow row;
    row.m = m;
    row.cls = "full";
    row.p = p;
    row.norm = fe.value;
    row.kind = fe.kind == NormEstimate::Kind::Exact2 ? "exact2" : "lower_bound";
    row.ell = ell;
    rows.push_back(row);
    if (!opt.include_classes || m == 0) continue;
    ShiftDecomposition dec = decompose(sys, tau, opt.C_R, ell);
    for (int j = 0; j < dec.M_k; ++j)
      for (int i = 0; i < ell; ++i) {
        if (dec.classes[static_cast<size_t>(j)][static_cast<size_t>(i)].empty()) continue;
        OperatorHandle cls = make_class_operator(sys, haar, dec, j, i);
        NormEstimate ce = p == 2.0 ? opnorm_exact_2(cls, 2, opt.seed)
                                   : opnorm_lower_p(cls, p, opt.restarts, opt.seed);
        ShiftNormRow crow;
        crow.m = m;
        crow.cls = "j" + std::to_string(j) + "i" + std::to_string(i);
        crow.p = p;
        crow.norm = ce.value;
        crow.kind = ce.kind == NormEstimate::Kind::Exact2 ? "exact2" : "lower_bound";
        crow.ell = ell;
        crow.M_k = dec.M_k;
        rows.push_back(crow);
      }
  }
  return rows;
}

std::vector<StripeNormRow> stripe_norm_curve(const DyadicSystem& sys, const HaarSystem& haar,
                                             std::span<const int> lambda_list, double p,
                                             int restarts, uint64_t seed) {
  std::vector<StripeNormRow> rows;
  for (int lambda : lambda_list) {
    if (lambda < 1) throw ModelError("lambda must be >= 1");
    if (lambda + 1 > sys.model.J) throw ModelError("depth insufficient for lambda");
    StripeFamily fam = make_classical_stripes(sys, lambda);
    StripeFunctions fns = make_stripe_functions(sys, fam, haar);
    OperatorHandle op = make_stripe_operator_handle(sys, haar, fns, 1);
    NormEstimate est =
        p == 2.0 ? opnorm_exact_2(op, 4, seed) : opnorm_lower_p(op, p, restarts, seed);
    StripeNormRow row;
    row.lambda = lambda;
    row.M = fam.M;
    row.p = p;
    row.norm = est.value;
    row.kind = est.kind == NormEstimate::Kind::Exact2 ? "exact2" : "lower_bound";
    row.envelope_lo = std::pow(static_cast<double>(fam.M), -1.0 / std::min(2.0, p));
    row.envelope_hi = std::pow(static_cast<double>(fam.M), -1.0 / std::max(2.0, p));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace adgrid
