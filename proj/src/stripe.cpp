#include "adgrid/stripe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace adgrid {

namespace {

std::string cube_str(const Cube& c) {
  std::ostringstream os;
  os << "(lev " << c.level << ", " << c.coords[0] << "," << c.coords[1] << ")";
  return os.str();
}

}  // namespace

StripeFamily make_classical_stripes(const DyadicSystem& sys, int lambda) {
  if (lambda < 1) throw ModelError("lambda must be >= 1");
  if (lambda > sys.model.J) throw ModelError("lambda exceeds the model depth");
  StripeFamily fam;
  fam.lambda = lambda;
  fam.M = 1 << lambda;
  fam.classical = true;
  fam.eps = 1.0;
  return fam;
}

std::vector<Cube> stripe_cubes(const DyadicSystem& sys, const StripeFamily& fam,
                               const Cube& a, int m) {
  const SpaceModel& mod = sys.model;
  if (m < 1 || m > fam.M) throw ModelError("stripe index out of range");
  if (a.level + fam.lambda > mod.J) throw ModelError("lambda exceeds remaining depth");
  if (!fam.classical) {
    auto it = fam.table.find(cube_key(mod, a));
    if (it == fam.table.end()) throw ModelError("no stripe table entry for cube");
    return it->second[static_cast<size_t>(m - 1)];
  }
  // Slab m along axis 0: descendants at level lev+lambda whose axis-0
  // coordinate offset equals m-1.
  std::vector<Cube> out;
  int lv = a.level + fam.lambda;
  int64_t base0 = a.coords[0] << fam.lambda;
  std::array<int64_t, kMaxDim> lo{}, span{};
  for (int i = 0; i < mod.k; ++i) {
    lo[i] = a.coords[i] << fam.lambda;
    span[i] = i == 0 ? 1 : int64_t{1} << fam.lambda;
  }
  std::array<int64_t, kMaxDim> cur{};
  std::function<void(int)> rec = [&](int axis) {
    if (axis == mod.k) {
      Cube c;
      c.level = lv;
      for (int i = 0; i < mod.k; ++i) c.coords[i] = cur[i];
      out.push_back(c);
      return;
    }
    for (int64_t t = 0; t < span[axis]; ++t) {
      cur[axis] = (axis == 0 ? base0 + (m - 1) : lo[axis] + t);
      rec(axis + 1);
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

Region stripe_region(const DyadicSystem& sys, const StripeFamily& fam,
                     const Cube& a, int m) {
  Region r(sys.model.cell_count());
  for (const Cube& c : stripe_cubes(sys, fam, a, m)) cube_add_to_region(sys.model, c, r);
  return r;
}

StripeReport verify_S1_S4(const DyadicSystem& sys, const StripeFamily& fam) {
  const SpaceModel& mod = sys.model;
  StripeReport rep;
  rep.eps = fam.eps;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    if (rep.violations.size() < 32) rep.violations.push_back(std::move(msg));
  };

  for (int lv = 0; lv + fam.lambda <= mod.J; ++lv) {
    for (int64_t f = 0; f < cubes_at_level(mod, lv); ++f) {
      Cube a = cube_from_flat(mod, lv, f);
      // (S1): the stripe unions partition A.
      Region acc(mod.cell_count());
      int64_t total = 0;
      std::vector<int64_t> counts(static_cast<size_t>(fam.M), 0);
      for (int m = 1; m <= fam.M; ++m) {
        Region s = stripe_region(sys, fam, a, m);
        for (const Cube& c : stripe_cubes(sys, fam, a, m)) {
          if (c.level != a.level + fam.lambda) fail("stripe cube at wrong level");
          if (!cube_contains(a, c)) fail("stripe cube escapes " + cube_str(a));
        }
        if (acc.intersects(s)) fail("stripes of " + cube_str(a) + " overlap");
        acc |= s;
        counts[static_cast<size_t>(m - 1)] = s.count();
        total += s.count();
      }
      if (total != cube_cells(mod, a) || !(acc == cube_region(mod, a)))
        fail("stripes do not partition " + cube_str(a));
      // (S2): comparability.
      for (int m = 0; m < fam.M; ++m)
        for (int n = 0; n < fam.M; ++n) {
          if (counts[static_cast<size_t>(n)] == 0) {
            fail("empty stripe in " + cube_str(a));
            continue;
          }
          double ratio = static_cast<double>(counts[static_cast<size_t>(m)]) /
                         static_cast<double>(counts[static_cast<size_t>(n)]);
          rep.K1 = std::max(rep.K1, ratio);
        }
      // (S4): coarse-cube overlap decay at the family exponent.  A level
      // lv+j cube meets the stripe union exactly when it is an ancestor of
      // one of the stripe cubes.
      for (int j = 0; j < fam.lambda; ++j) {
        for (int m = 1; m <= fam.M; ++m) {
          std::set<uint64_t> anc;
          for (const Cube& r : stripe_cubes(sys, fam, a, m))
            anc.insert(cube_key(mod, cube_ancestor(r, lv + j)));
          double lhs = static_cast<double>(anc.size()) *
                       std::ldexp(1.0, -(lv + j) * mod.k);
          double scale = std::pow(mod.q, j * fam.eps) * cube_measure(mod, a);
          rep.K2 = std::max(rep.K2, lhs / scale);
        }
      }
    }
  }

  // (S3): for fixed m the stripe unions over all cubes are nested.
  for (int m = 1; m <= fam.M; ++m) {
    std::vector<Region> regions;
    for (int lv = 0; lv + fam.lambda <= mod.J; ++lv)
      for (int64_t f = 0; f < cubes_at_level(mod, lv); ++f)
        regions.push_back(stripe_region(sys, fam, cube_from_flat(mod, lv, f), m));
    if (!is_nested(regions)) fail("stripe unions for index " + std::to_string(m) + " not nested");
  }

  if (fam.classical) {
    if (rep.K1 != 1.0) fail("classical family should certify K1 = 1");
    if (rep.K2 != 1.0) fail("classical family should certify K2 = 1");
  }
  return rep;
}

StripeFunctions make_stripe_functions(const DyadicSystem& sys, const StripeFamily& fam,
                                      const HaarSystem& haar) {
  const SpaceModel& mod = sys.model;
  StripeFunctions fns;
  fns.family = fam;
  double cg = 0.0;
  // stripe summands are haar functions, so they need one more level below
  for (int lv = 0; lv + fam.lambda < mod.J; ++lv)
    for (int64_t f = 0; f < cubes_at_level(mod, lv); ++f) {
      Cube a = cube_from_flat(mod, lv, f);
      std::vector<double> sup(static_cast<size_t>(fam.M)),
          avg(static_cast<size_t>(fam.M));
      for (int m = 1; m <= fam.M; ++m) {
        CellFunction g = stripe_g(sys, fns, haar, a, m);
        Region s = stripe_region(sys, fam, a, m);
        // (G1) support inside the stripe union, (G2) mean zero.
        for (int64_t c = 0; c < mod.cell_count(); ++c)
          if (g.v[static_cast<size_t>(c)] != 0.0 && !s.test(c))
            throw ModelError("stripe function escapes its stripe");
        if (std::fabs(integral(g)) > 1e-12) throw ModelError("stripe function not mean zero");
        sup[static_cast<size_t>(m - 1)] = norm_inf(g);
        double abs_int = 0.0;
        for (double x : g.v) abs_int += std::fabs(x);
        abs_int *= mod.cell_measure();
        avg[static_cast<size_t>(m - 1)] =
            abs_int / (static_cast<double>(s.count()) * mod.cell_measure());
      }
      for (int m = 0; m < fam.M; ++m)
        for (int n = 0; n < fam.M; ++n) {
          if (m == n) continue;
          cg = std::max(cg, sup[static_cast<size_t>(m)] / avg[static_cast<size_t>(n)]);
        }
    }
  fns.C_g = cg;
  return fns;
}

CellFunction stripe_g(const DyadicSystem& sys, const StripeFunctions& fns,
                      const HaarSystem& haar, const Cube& a, int m) {
  CellFunction g = CellFunction::zero(sys.model);
  for (const Cube& r : stripe_cubes(sys, fns.family, a, m)) haar_add(haar, r, 1.0, g);
  return g;
}

namespace {

double K3_constant(const SpaceModel& mod, const StripeFamily& fam, double K1, double K2,
                   int k_gap) {
  double qe = std::pow(mod.q, k_gap * fam.eps);
  return (1.0 + K1) * K1 * K1 * K2 / (1.0 - qe);
}

}  // namespace

OverlapBound overlap_bound(const DyadicSystem& sys, const StripeFamily& fam,
                           const Cube& a, int m, int n, int k_gap) {
  const SpaceModel& mod = sys.model;
  if (k_gap < 1) throw ModelError("k_gap must be >= 1");
  OverlapBound out;
  Region sm = stripe_region(sys, fam, a, m);
  Region acc(mod.cell_count());
  for (int d = 1; d * k_gap <= fam.lambda - 1; ++d) {
    int lv = a.level + d * k_gap;
    if (lv + fam.lambda > mod.J) continue;  // no stripes at this depth
    // Intermediate-level cubes meeting the stripe union are exactly the
    // ancestors of its cubes.
    std::set<uint64_t> seen;
    for (const Cube& r : stripe_cubes(sys, fam, a, m)) {
      Cube b = cube_ancestor(r, lv);
      if (!seen.insert(cube_key(mod, b)).second) continue;
      acc |= stripe_region(sys, fam, b, m);
      acc |= stripe_region(sys, fam, b, n);
    }
  }
  acc &= sm;
  out.lhs_measure = static_cast<double>(acc.count()) * mod.cell_measure();
  out.K3 = K3_constant(mod, fam, 1.0, 1.0, k_gap);
  out.rhs_bound = out.K3 * std::pow(mod.q, k_gap * fam.eps) *
                  static_cast<double>(sm.count()) * mod.cell_measure();
  out.ok = out.lhs_measure <= out.rhs_bound;
  return out;
}

LevelSetBound stripe_function_lowerbound(const DyadicSystem& sys,
                                         const StripeFunctions& fns,
                                         const HaarSystem& haar, const Cube& a,
                                         int m, int n) {
  const SpaceModel& mod = sys.model;
  LevelSetBound out;
  CellFunction gm = stripe_g(sys, fns, haar, a, m);
  CellFunction gn = stripe_g(sys, fns, haar, a, n);
  double thresh = norm_inf(gm) / (2.0 * fns.C_g);
  int64_t cnt = 0;
  for (double x : gn.v)
    if (std::fabs(x) >= thresh) ++cnt;
  out.level_set_measure = static_cast<double>(cnt) * mod.cell_measure();
  Region sn = stripe_region(sys, fns.family, a, n);
  out.bound = static_cast<double>(sn.count()) * mod.cell_measure() /
              (2.0 * fns.C_g * fns.C_g);
  out.ok = out.level_set_measure >= out.bound;
  return out;
}

int carrier_k_gap(const DyadicSystem& sys, const StripeFamily& fam, double C_g) {
  for (int k = 1; k <= 62; ++k) {
    double k3 = K3_constant(sys.model, fam, 1.0, 1.0, k);
    if (k3 * std::pow(sys.model.q, k * fam.eps) <= 1.0 / (4.0 * C_g * C_g)) return k;
  }
  throw ModelError("no usable carrier gap");
}

StripeCarriers build_stripe_carriers(const DyadicSystem& sys, const StripeFunctions& fns,
                                     const HaarSystem& haar, int m, int n, int nu,
                                     int delta, int k_gap) {
  (void)haar;
  const SpaceModel& mod = sys.model;
  const StripeFamily& fam = fns.family;
  StripeCarriers out;
  out.m = m;
  out.n = n;
  out.nu = nu;
  out.delta = delta;
  out.k_gap = k_gap > 0 ? k_gap : carrier_k_gap(sys, fam, fns.C_g);
  if (nu < 0 || nu >= out.k_gap) throw ModelError("nu out of range");
  if (delta != 0 && delta != 1) throw ModelError("delta must be 0 or 1");

  // Selected levels: (2j+delta) lambda + i with i = nu (mod k_gap), i < lambda;
  // only levels whose stripes exist at this depth.
  std::vector<std::pair<int, int>> levels;  // (level, block j)
  for (int j = 0;; ++j) {
    int base = (2 * j + delta) * fam.lambda;
    if (base > mod.J) break;
    for (int i = nu; i < fam.lambda; i += out.k_gap) {
      int lv = base + i;
      if (lv + fam.lambda <= mod.J) levels.emplace_back(lv, j);
    }
  }
  std::sort(levels.begin(), levels.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  if (fam.lambda + 1 > mod.J) throw ModelError("depth insufficient for carriers");
  if (levels.empty()) return out;  // residue class occupies no level here

  // Finest level first; subtract the carriers of strictly finer cubes of the
  // same block.  Across blocks the carriers nest by granularity alone.
  std::vector<int> block_of;
  for (auto [lv, blk] : levels)
    for (int64_t f = 0; f < cubes_at_level(mod, lv); ++f) {
      Cube q = cube_from_flat(mod, lv, f);
      Region r = stripe_region(sys, fam, q, m) | stripe_region(sys, fam, q, n);
      for (size_t t = 0; t < out.cubes.size(); ++t)
        if (out.cubes[t].level > lv && block_of[t] == blk) r -= out.carrier[t];
      out.cubes.push_back(q);
      out.carrier.push_back(std::move(r));
      block_of.push_back(blk);
    }

  out.nested = is_nested(out.carrier);
  double keep = 1.0 - 1.0 / (4.0 * fns.C_g * fns.C_g);
  for (size_t t = 0; t < out.cubes.size(); ++t) {
    Region sn = stripe_region(sys, fam, out.cubes[t], n);
    double retained = static_cast<double>((out.carrier[t] & sn).count()) /
                      static_cast<double>(sn.count());
    out.worst_retention = std::min(out.worst_retention, retained);
    if (retained < keep) out.retention_ok = false;
  }

  std::vector<std::pair<int, Region>> fam_f, fam_g;
  for (size_t t = 0; t < out.cubes.size(); ++t) {
    fam_f.emplace_back(out.cubes[t].level, out.carrier[t]);
    fam_g.emplace_back(out.cubes[t].level, stripe_region(sys, fam, out.cubes[t], m));
  }
  out.carriers_filtration = make_filtration(mod, fam_f);
  out.stripes_filtration = make_filtration(mod, fam_g);
  return out;
}

CellFunction apply_stripe_operator(const DyadicSystem& sys, const StripeFunctions& fns,
                                   const HaarSystem& haar, std::span<const Cube> cubes,
                                   std::span<const double> coeffs, int m) {
  if (cubes.size() != coeffs.size()) throw ModelError("apply_stripe_operator: size mismatch");
  CellFunction out = CellFunction::zero(sys.model);
  for (size_t i = 0; i < cubes.size(); ++i) {
    if (cubes[i].level + fns.family.lambda >= sys.model.J)
      throw ModelError("cube too deep for the stripe depth");
    if (coeffs[i] == 0.0) continue;
    for (const Cube& r : stripe_cubes(sys, fns.family, cubes[i], m))
      haar_add(haar, r, coeffs[i], out);
  }
  return out;
}

std::string stripe_family_to_json(const DyadicSystem& sys, const StripeFamily& fam) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["lambda"] = fam.lambda;
  j["M"] = fam.M;
  j["classical"] = fam.classical;
  j["eps"] = fam.eps;
  if (!fam.classical) {
    j["table"] = nlohmann::json::array();
    for (const auto& [key, stripes] : fam.table) {
      nlohmann::json entry;
      entry["cube_key"] = key;
      entry["stripes"] = nlohmann::json::array();
      for (const auto& lst : stripes) {
        nlohmann::json sj = nlohmann::json::array();
        for (const Cube& c : lst) {
          std::vector<int64_t> v{c.level};
          for (int i = 0; i < sys.model.k; ++i) v.push_back(c.coords[i]);
          sj.push_back(v);
        }
        entry["stripes"].push_back(sj);
      }
      j["table"].push_back(entry);
    }
  }
  return j.dump(2);
}

}  // namespace adgrid
