// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Budgets are asserted, not just reported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "adgrid/adapt.hpp"
#include "adgrid/cubes.hpp"
#include "adgrid/haar.hpp"
#include "adgrid/model.hpp"
#include "adgrid/norms.hpp"
#include "adgrid/shift.hpp"
#include "adgrid/stripe.hpp"

using namespace adgrid;

namespace {

struct Criterion {
  int id = 0;
  bool pass = true;
  std::vector<std::string> notes;
  double seconds = 0.0;

  void fail(const std::string& why) {
    pass = false;
    notes.push_back("FAIL: " + why);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Soundness bookkeeping for criterion 7: every reported lower bound must be
// reproducible from its witness.
struct SoundnessLog {
  int checked = 0;
  double worst_rel = 0.0;
  bool ok = true;

  void record(const OperatorHandle& op, const NormEstimate& est) {
    if (est.kind != NormEstimate::Kind::LowerBound || est.witness.empty()) return;
    double redo = witness_ratio(op, est.witness, est.p);
    double rel = std::fabs(redo - est.value) / std::max(1.0, est.value);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-12) ok = false;
    ++checked;
  }
};

SoundnessLog g_sound;

// ---------------------------------------------------------------------------

Criterion criterion1() {
  Criterion c;
  c.id = 1;
  struct Case {
    Kind kind;
    int k, J;
  } cases[] = {{Kind::TorusSup, 1, 12}, {Kind::TorusSup, 2, 6}, {Kind::TorusSquared, 1, 10}};
  for (const Case& cs : cases) {
    SpaceModel model = make_model(cs.kind, cs.k, cs.J);
    ModelReport quasi = verify_quasimetric(model, 100000, 1);
    ModelReport doubling = verify_doubling(model);
    if (!quasi.ok) c.fail("quasimetric violations at k=" + std::to_string(cs.k));
    if (!doubling.ok) c.fail("doubling violations at k=" + std::to_string(cs.k));
    try {
      DyadicSystem sys = build_system(model);
      CubeReport rep = verify_system(sys);
      if (!rep.ok)
        c.fail("cube axioms failed (k=" + std::to_string(cs.k) + ", J=" + std::to_string(cs.J) +
               "): " + (rep.violations.empty() ? "?" : rep.violations.front()));
      else
        c.note("k=" + std::to_string(cs.k) + " J=" + std::to_string(cs.J) +
               ": C_1=" + fmt(rep.C_1) + " C_2=" + fmt(rep.C_2) + " C_3=" + fmt(rep.C_3) +
               " eta=" + fmt(rep.eta) + " N=" + std::to_string(rep.N));
    } catch (const std::exception& e) {
      c.fail(e.what());
    }
  }
  return c;
}

Criterion criterion2() {
  Criterion c;
  c.id = 2;
  struct Case {
    Kind kind;
    int k, J;
  } cases[] = {{Kind::TorusSup, 1, 10}, {Kind::TorusSup, 2, 5}, {Kind::TorusSquared, 1, 8}};
  for (const Case& cs : cases) {
    DyadicSystem sys = build_system(make_model(cs.kind, cs.k, cs.J));
    const SpaceModel& m = sys.model;
    std::mt19937_64 rng(2026);
    for (int t = 0; t < 500; ++t) {
      int lev = static_cast<int>(rng() % static_cast<uint64_t>(m.J + 1));
      Cube a = cube_from_flat(m, lev, static_cast<int64_t>(rng() % cubes_at_level(m, lev)));
      double r = 0.25 * static_cast<double>(1 + rng() % 16);
      Region d = diamond(sys, a, r);
      auto ctr = cube_center(m, a);
      double bound = m.K_X * (sys.C_2 + r) * std::pow(m.q, lev);
      bool ok = true;
      d.for_each([&](int64_t cell) {
        if (cell_point_distance(m, cell, {ctr.data(), static_cast<size_t>(m.k)}) >= bound)
          ok = false;
      });
      if (!ok) c.fail("diamond/ball inclusion failed");
    }
    int intersections = 0;
    for (int t = 0; t < 500; ++t) {
      int l1 = static_cast<int>(rng() % static_cast<uint64_t>(m.J + 1));
      int l2 = l1 + static_cast<int>(rng() % static_cast<uint64_t>(m.J + 1 - l1));
      Cube a1 = cube_from_flat(m, l1, static_cast<int64_t>(rng() % cubes_at_level(m, l1)));
      Cube a2 = cube_from_flat(m, l2, static_cast<int64_t>(rng() % cubes_at_level(m, l2)));
      double r1 = 0.25 * static_cast<double>(1 + rng() % 8);
      double r2 = 0.25 * static_cast<double>(1 + rng() % 8);
      auto res = diamond_intersection_bound(sys, a1, a2, r1, r2);
      if (res.intersects) {
        ++intersections;
        if (!res.inclusion_verified) c.fail("diamond intersection inclusion failed");
      }
    }
    c.note("k=" + std::to_string(cs.k) + (cs.kind == Kind::TorusSquared ? " squared" : "") +
           ": 500+500 instances, " + std::to_string(intersections) + " intersecting pairs");
  }
  return c;
}

Criterion criterion3() {
  Criterion c;
  c.id = 3;
  struct Case {
    int k, J, count;
  } cases[] = {{1, 12, 200}, {2, 6, 200}};
  for (const Case& cs : cases) {
    DyadicSystem sys = build_system(make_model(Kind::TorusSup, cs.k, cs.J));
    InstanceParams params;
    if (cs.k == 2) params.levels = 2;
    double worst_ratio = 0.0;
    for (int i = 0; i < cs.count; ++i) {
      AdaptInput in = random_admissible_instance(sys, 1000 + static_cast<uint64_t>(i), params);
      HypothesesReport hyp = check_hypotheses(sys, in);
      if (!hyp.ok) {
        c.fail("instance " + std::to_string(i) + " inadmissible: " +
               (hyp.violations.empty() ? "?" : hyp.violations.front()));
        continue;
      }
      AdaptedGrid grid = build_adapted_grid(sys, in);
      GridReport rep = verify_adapted_grid(sys, in, grid);
      if (!rep.ok)
        c.fail("instance " + std::to_string(i) + " failed: " +
               (rep.violations.empty() ? "?" : rep.violations.front()));
      worst_ratio = std::max(worst_ratio, rep.max_measure_ratio);
      // determinism: a second build must serialize identically
      AdaptedGrid again = build_adapted_grid(sys, in);
      if (grid_to_json(sys, in, grid) != grid_to_json(sys, in, again))
        c.fail("instance " + std::to_string(i) + " not deterministic");
    }
    if (cs.k == 1 && worst_ratio > 20.0)
      c.fail("measure ratio " + fmt(worst_ratio) + " exceeds 20");
    c.note("k=" + std::to_string(cs.k) + ": " + std::to_string(cs.count) +
           " instances, worst measure ratio " + fmt(worst_ratio));
  }
  return c;
}

Criterion criterion4() {
  Criterion c;
  c.id = 4;
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 12));
  HaarSystem haar = make_haar(sys);
  double C_R = 4.0;
  double radius = theta_conflict_radius(sys, C_R);
  double worst_c5 = 0.0;
  int classes_checked = 0;
  for (int64_t m : {int64_t{1}, int64_t{2}, int64_t{8}}) {
    ShiftRelation tau = make_axis_shift(sys, m, 0, 0, sys.model.J - 1);
    RelationReport rel = certify_relation(sys, haar, tau);
    if (!rel.ok) {
      c.fail("relation certificates failed at m=" + std::to_string(m));
      continue;
    }
    int ell = ell_for_shift(sys, C_R, static_cast<double>(m));
    ShiftDecomposition dec = decompose(sys, tau, C_R, ell, 0, radius);
    LocalizationReport loc = check_localization(sys, dec);
    if (!loc.ok) c.fail("localization failed at m=" + std::to_string(m));
    for (int j = 0; j < dec.M_k; ++j)
      for (int i = 0; i < ell; ++i) {
        if (dec.classes[static_cast<size_t>(j)][static_cast<size_t>(i)].empty()) continue;
        ThetaSupports theta = build_theta(sys, dec, j, i, C_R);
        if (!theta.nested || !theta.cover_ok || !theta.inclusion_ok || !theta.grids_ok) {
          c.fail("support certificates failed at m=" + std::to_string(m) + " class j" +
                 std::to_string(j) + "i" + std::to_string(i));
          continue;
        }
        DominationReport dom = domination_check(sys, dec, j, i, theta, haar);
        if (!dom.atoms_ok || !dom.ok) {
          c.fail("domination failed at m=" + std::to_string(m) + " class j" +
                 std::to_string(j) + "i" + std::to_string(i) + ": " +
                 (dom.violations.empty() ? "?" : dom.violations.front()));
          continue;
        }
        worst_c5 = std::max(worst_c5, dom.c5_star);
        ++classes_checked;
      }
    if (worst_c5 > 4.0 * rel.C_h)
      c.fail("c5 = " + fmt(worst_c5) + " exceeds 4 C_h = " + fmt(4.0 * rel.C_h) +
             " at m=" + std::to_string(m));
  }
  c.note(std::to_string(classes_checked) + " classes, worst c5 = " + fmt(worst_c5));
  return c;
}

Criterion criterion5() {
  Criterion c;
  c.id = 5;
  double t0 = now_seconds();
  DyadicSystem sys = build_system(make_model(Kind::TorusSup, 1, 14));
  HaarSystem haar = make_haar(sys);
  double C_R = 4.0;

  // p = 2: the full-span operator is an isometry for every m
  double worst2 = 0.0;
  for (int64_t m = 0; m <= 512; ++m) {
    ShiftRelation tau = make_axis_shift(sys, m, 0, 0, sys.model.J - 1);
    OperatorHandle op = make_shift_operator(sys, haar, tau);
    NormEstimate est = opnorm_exact_2(op);
    if (!est.converged) c.fail("p=2 power iteration failed at m=" + std::to_string(m));
    worst2 = std::max(worst2, std::fabs(est.value - 1.0));
  }
  if (worst2 > 1e-9) c.fail("p=2 norms deviate from 1 by " + fmt(worst2));
  c.note("p=2 full span: max |norm-1| = " + fmt(worst2) + " over m = 0..512 (" +
         fmt(now_seconds() - t0) + " s)");
  t0 = now_seconds();

  // p = 4: per-class uniformity and the full-span growth envelope
  std::vector<int64_t> ms{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  double class_ref = 0.0, class_worst = 0.0;
  double full_ref = 0.0;
  bool envelope_ok = true;
  for (int64_t m : ms) {
    ShiftRelation tau = make_axis_shift(sys, m, 0, 0, sys.model.J - 1);
    int ell = ell_for_shift(sys, C_R, static_cast<double>(m));
    OperatorHandle full = make_shift_operator(sys, haar, tau);
    NormEstimate fe = opnorm_lower_p(full, 4.0, 2, 0, 300);
    g_sound.record(full, fe);
    if (m == 1) full_ref = fe.value;
    double budget = full_ref * 4.0 * std::log2(2.0 + static_cast<double>(m));
    if (fe.value > budget) {
      envelope_ok = false;
      c.fail("full-span p=4 at m=" + std::to_string(m) + ": " + fmt(fe.value) +
             " exceeds N(1)*4*log2(2+m) = " + fmt(budget));
    }
    ShiftDecomposition dec = decompose(sys, tau, C_R, ell);
    double m_best = 0.0;
    for (int j = 0; j < dec.M_k; ++j)
      for (int i = 0; i < ell; ++i) {
        if (dec.classes[static_cast<size_t>(j)][static_cast<size_t>(i)].empty()) continue;
        OperatorHandle cls = make_class_operator(sys, haar, dec, j, i);
        NormEstimate ce = opnorm_lower_p(cls, 4.0, 1, 0, 150);
        g_sound.record(cls, ce);
        m_best = std::max(m_best, ce.value);
      }
    if (m == 1) class_ref = m_best;
    class_worst = std::max(class_worst, m_best);
  }
  if (class_ref <= 0.0) {
    c.fail("no class norms at m=1");
  } else if (class_worst / class_ref > 3.0) {
    c.fail("per-class norms grow: max/ref = " + fmt(class_worst / class_ref));
  }
  c.note("p=4 classes: max/ref = " + fmt(class_ref > 0 ? class_worst / class_ref : -1.0) +
         ", full-span envelope " + (envelope_ok ? "holds" : "fails") + " (" +
         fmt(now_seconds() - t0) + " s)");
  return c;
}

Criterion criterion6(DyadicSystem& sys10, HaarSystem& haar10) {
  Criterion c;
  c.id = 6;
  const SpaceModel& m10 = sys10.model;

  // classical constants and the exact p = 2 decay
  for (int lambda = 1; lambda <= 5; ++lambda) {
    StripeFamily fam = make_classical_stripes(sys10, lambda);
    if (fam.M != (1 << lambda)) c.fail("M != 2^lambda");
    StripeReport rep = verify_S1_S4(sys10, fam);
    if (!rep.ok || rep.K1 != 1.0 || rep.K2 != 1.0 || rep.eps != 1.0)
      c.fail("classical constants off at lambda=" + std::to_string(lambda));
    StripeFunctions fns = make_stripe_functions(sys10, fam, haar10);
    if (fns.C_g != 1.0) c.fail("C_g != 1 at lambda=" + std::to_string(lambda));
    OperatorHandle op = make_stripe_operator_handle(sys10, haar10, fns, 1);
    NormEstimate est = opnorm_exact_2(op);
    double expect = std::pow(2.0, -0.5 * lambda);
    if (std::fabs(est.value - expect) > 1e-9)
      c.fail("p=2 stripe norm off at lambda=" + std::to_string(lambda) + ": " + fmt(est.value));
  }
  c.note("classical constants and p=2 decay match");

  // stripe overlap bound over every cube deep enough for the full range
  int overlap_checked = 0;
  for (int lambda = 2; lambda <= 5; ++lambda) {
    StripeFamily fam = make_classical_stripes(sys10, lambda);
    for (int k_gap = 1; k_gap < lambda; ++k_gap)
      for (int lev = 0; lev + 2 * lambda - 1 <= m10.J; ++lev)
        for (int64_t f = 0; f < cubes_at_level(m10, lev); ++f) {
          Cube a = cube_from_flat(m10, lev, f);
          // sample stripe index pairs; the family is symmetric across m
          for (auto [sm, sn] : {std::pair{1, 2}, {1, fam.M}, {fam.M / 2, fam.M}}) {
            if (sm == sn) continue;
            OverlapBound ob = overlap_bound(sys10, fam, a, sm, sn, k_gap);
            if (!ob.ok) c.fail("overlap bound failed at lambda=" + std::to_string(lambda));
            ++overlap_checked;
          }
        }
  }
  c.note(std::to_string(overlap_checked) + " overlap-bound instances");

  // carrier retention across residues and parities
  int carriers_checked = 0;
  for (int lambda = 2; lambda <= 5; ++lambda) {
    StripeFamily fam = make_classical_stripes(sys10, lambda);
    StripeFunctions fns = make_stripe_functions(sys10, fam, haar10);
    int kg = carrier_k_gap(sys10, fam, fns.C_g);
    for (auto [sm, sn] : {std::pair{1, 2}, {1, fam.M}, {fam.M / 2, fam.M}}) {
      if (sm == sn) continue;
      for (int delta : {0, 1})
        for (int nu = 0; nu < kg; ++nu) {
          StripeCarriers car = build_stripe_carriers(sys10, fns, haar10, sm, sn, nu, delta, kg);
          if (car.cubes.empty()) continue;
          if (!car.nested) c.fail("carriers not nested at lambda=" + std::to_string(lambda));
          if (!car.retention_ok)
            c.fail("carrier retention " + fmt(car.worst_retention) + " too small at lambda=" +
                   std::to_string(lambda));
          ++carriers_checked;
        }
    }
  }
  c.note(std::to_string(carriers_checked) + " carrier systems");

  // p = 4 envelope fitted at lambda = 1 with slack 2
  std::vector<double> lower4(5, 0.0);
  for (int lambda = 1; lambda <= 5; ++lambda) {
    StripeFamily fam = make_classical_stripes(sys10, lambda);
    StripeFunctions fns = make_stripe_functions(sys10, fam, haar10);
    OperatorHandle op = make_stripe_operator_handle(sys10, haar10, fns, 1);
    NormEstimate est = opnorm_lower_p(op, 4.0, 2, 0, 300);
    g_sound.record(op, est);
    lower4[static_cast<size_t>(lambda - 1)] = est.value;
  }
  double n1 = lower4[0];
  double c_lo = n1 * std::sqrt(2.0) / 2.0;
  double c_hi = 2.0 * n1 * std::pow(2.0, 0.25);
  for (int lambda = 1; lambda <= 5; ++lambda) {
    double M = std::ldexp(1.0, lambda);
    double v = lower4[static_cast<size_t>(lambda - 1)];
    if (v < c_lo * std::pow(M, -0.5) || v > c_hi * std::pow(M, -0.25))
      c.fail("p=4 envelope violated at lambda=" + std::to_string(lambda) + ": " + fmt(v));
  }
  c.note("p=4 lower bounds: " + fmt(lower4[0]) + ", " + fmt(lower4[1]) + ", " + fmt(lower4[2]) +
         ", " + fmt(lower4[3]) + ", " + fmt(lower4[4]));

  // comparability statistic across stripe indices
  double worst_ratio = 0.0;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  for (int lambda = 1; lambda <= 5; ++lambda) {
    StripeFamily fam = make_classical_stripes(sys10, lambda);
    StripeFunctions fns = make_stripe_functions(sys10, fam, haar10);
    std::vector<Cube> domain;
    for (int lv = 0; lv + lambda < m10.J; ++lv)
      for (int64_t f = 0; f < cubes_at_level(m10, lv); ++f)
        domain.push_back(cube_from_flat(m10, lv, f));
    for (double p : {1.5, 2.0, 3.0}) {
      for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> coeff(domain.size());
        for (auto& x : coeff) x = g(rng);
        double lo = 0.0, hi = 0.0;
        for (int sm = 1; sm <= fam.M; ++sm) {
          CellFunction y = apply_stripe_operator(sys10, fns, haar10, domain, coeff, sm);
          double nv = norm_p(y, p);
          if (sm == 1) {
            lo = hi = nv;
          } else {
            lo = std::min(lo, nv);
            hi = std::max(hi, nv);
          }
        }
        if (lo > 0.0) worst_ratio = std::max(worst_ratio, hi / lo);
      }
    }
  }
  if (worst_ratio > 10.0) c.fail("comparability ratio " + fmt(worst_ratio) + " exceeds 10");
  c.note("comparability ratio " + fmt(worst_ratio));
  return c;
}

Criterion criterion7(DyadicSystem& sys10, HaarSystem& haar10) {
  Criterion c;
  c.id = 7;
  // p = 2 agreement of the nonlinear method with the exact path
  DyadicSystem sys14 = build_system(make_model(Kind::TorusSup, 1, 14));
  HaarSystem haar14 = make_haar(sys14);
  double worst = 0.0;
  for (int64_t m : {int64_t{1}, int64_t{8}, int64_t{512}}) {
    ShiftRelation tau = make_axis_shift(sys14, m, 0, 0, sys14.model.J - 1);
    OperatorHandle op = make_shift_operator(sys14, haar14, tau);
    NormEstimate lo = opnorm_lower_p(op, 2.0, 2, 0, 300);
    g_sound.record(op, lo);
    NormEstimate ex = opnorm_exact_2(op);
    worst = std::max(worst, std::fabs(lo.value - ex.value));
  }
  for (int lambda = 1; lambda <= 5; ++lambda) {
    StripeFamily fam = make_classical_stripes(sys10, lambda);
    StripeFunctions fns = make_stripe_functions(sys10, fam, haar10);
    OperatorHandle op = make_stripe_operator_handle(sys10, haar10, fns, 1);
    NormEstimate lo = opnorm_lower_p(op, 2.0, 2, 0, 300);
    g_sound.record(op, lo);
    NormEstimate ex = opnorm_exact_2(op);
    worst = std::max(worst, std::fabs(lo.value - ex.value));
  }
  if (worst > 1e-6) c.fail("p=2 agreement off by " + fmt(worst));
  c.note("p=2 agreement within " + fmt(worst));

  // witness reproduction collected across the whole suite
  if (!g_sound.ok) c.fail("a lower bound failed to reproduce from its witness");
  c.note(std::to_string(g_sound.checked) + " witnesses reproduced, worst rel err " +
         fmt(g_sound.worst_rel));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

  std::vector<Criterion> results;
  auto run = [&](int id, double budget, auto&& fn) {
    if (only != 0 && only != id) return;
    double t0 = now_seconds();
    Criterion c = fn();
    c.seconds = now_seconds() - t0;
    if (budget > 0.0 && c.seconds > budget)
      c.fail("runtime " + fmt(c.seconds) + " s exceeds budget " + fmt(budget) + " s");
    results.push_back(std::move(c));
    const Criterion& r = results.back();
    std::printf("[%s] criterion %d (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.seconds);
    for (const std::string& n : r.notes) std::printf("         %s\n", n.c_str());
    std::fflush(stdout);
  };

  run(1, 60.0, criterion1);
  run(2, 0.0, criterion2);
  run(3, 180.0, criterion3);
  run(4, 0.0, criterion4);
  run(5, 600.0, criterion5);

  // criteria 6 and 7 share the depth-10 stripe setup
  DyadicSystem sys10 = build_system(make_model(Kind::TorusSup, 1, 10));
  HaarSystem haar10 = make_haar(sys10);
  run(6, 0.0, [&] { return criterion6(sys10, haar10); });
  run(7, 0.0, [&] { return criterion7(sys10, haar10); });

  bool all = true;
  for (const Criterion& c : results) all = all && c.pass;
  std::printf("%s\n", all ? "ACCEPTANCE: ALL CRITERIA PASS" : "ACCEPTANCE: FAILURES PRESENT");
  return all ? 0 : 1;
}
