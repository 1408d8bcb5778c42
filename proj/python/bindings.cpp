#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adgrid/adapt.hpp"
#include "adgrid/cubes.hpp"
#include "adgrid/haar.hpp"
#include "adgrid/model.hpp"
#include "adgrid/norms.hpp"
#include "adgrid/shift.hpp"
#include "adgrid/stripe.hpp"

namespace py = pybind11;
using namespace adgrid;

namespace {

Cube make_cube(int level, const std::vector<int64_t>& coords) {
  Cube c;
  c.level = level;
  for (size_t i = 0; i < coords.size() && i < kMaxDim; ++i) c.coords[i] = coords[i];
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dyadic cube systems, adapted grids and rearrangement norms";

  py::register_exception<ModelError>(m, "ModelError");

  py::enum_<Kind>(m, "Kind")
      .value("TorusSup", Kind::TorusSup)
      .value("TorusSquared", Kind::TorusSquared);

  py::class_<SpaceModel>(m, "SpaceModel")
      .def_readonly("kind", &SpaceModel::kind)
      .def_readonly("k", &SpaceModel::k)
      .def_readonly("J", &SpaceModel::J)
      .def_readonly("K_X", &SpaceModel::K_X)
      .def_readonly("C_d", &SpaceModel::C_d)
      .def_readonly("q", &SpaceModel::q)
      .def("cell_count", &SpaceModel::cell_count)
      .def("cell_measure", &SpaceModel::cell_measure);

  m.def("make_model", &make_model, py::arg("kind"), py::arg("k"), py::arg("J"));
  m.def("quasidistance", [](const SpaceModel& mod, const std::vector<double>& x,
                            const std::vector<double>& y) {
    return quasidistance(mod, {x.data(), x.size()}, {y.data(), y.size()});
  });
  m.def("verify_quasimetric",
        [](const SpaceModel& mod, uint64_t samples, uint64_t seed) {
          ModelReport r = verify_quasimetric(mod, samples, seed);
          return py::make_tuple(r.ok, r.violations);
        },
        py::arg("model"), py::arg("samples") = 100000, py::arg("seed") = 1);
  m.def("verify_doubling", [](const SpaceModel& mod) {
    ModelReport r = verify_doubling(mod);
    return py::make_tuple(r.ok, r.violations);
  });

  py::class_<Cube>(m, "Cube")
      .def(py::init(&make_cube), py::arg("level"), py::arg("coords"))
      .def_readonly("level", &Cube::level)
      .def_property_readonly("coords",
                             [](const Cube& c) {
                               return std::vector<int64_t>(c.coords.begin(), c.coords.end());
                             })
      .def("__eq__", [](const Cube& a, const Cube& b) { return a == b; })
      .def("__repr__", [](const Cube& c) {
        return "Cube(level=" + std::to_string(c.level) + ", c0=" + std::to_string(c.coords[0]) +
               ")";
      });

  py::class_<Region>(m, "Region")
      .def("count", &Region::count)
      .def("cells", &Region::cells)
      .def("contains", &Region::contains)
      .def("intersects", &Region::intersects);
  m.def("measure", [](const SpaceModel& mod, const Region& r) { return measure(mod, r); });

  py::class_<DyadicSystem>(m, "DyadicSystem")
      .def_readonly("model", &DyadicSystem::model)
      .def_readonly("C_1", &DyadicSystem::C_1)
      .def_readonly("C_2", &DyadicSystem::C_2)
      .def_readonly("C_3", &DyadicSystem::C_3)
      .def_readonly("eta", &DyadicSystem::eta)
      .def_readonly("N", &DyadicSystem::N);
  m.def("build_system", &build_system);
  m.def("verify_system", [](const DyadicSystem& sys) {
    CubeReport r = verify_system(sys);
    return py::make_tuple(r.ok, r.violations);
  });
  m.def("diamond", &diamond);
  m.def("boundary_layer", &boundary_layer);
  m.def("diamond_intersection_bound", [](const DyadicSystem& sys, const Cube& a1,
                                         const Cube& a2, double r1, double r2) {
    auto r = diamond_intersection_bound(sys, a1, a2, r1, r2);
    return py::make_tuple(r.intersects, r.r, r.inclusion_verified);
  });
  m.def("cube_region", [](const SpaceModel& mod, const Cube& c) { return cube_region(mod, c); });
  m.def("cube_measure",
        [](const SpaceModel& mod, const Cube& c) { return cube_measure(mod, c); });

  // adapted grids
  py::class_<AdaptInput>(m, "AdaptInput")
      .def(py::init<>())
      .def_readwrite("family", &AdaptInput::family)
      .def_readwrite("phi", &AdaptInput::phi)
      .def_readwrite("C_R", &AdaptInput::C_R)
      .def_readwrite("mu", &AdaptInput::mu);
  py::class_<AdaptedGrid>(m, "AdaptedGrid")
      .def_readonly("family", &AdaptedGrid::family)
      .def_readonly("regions", &AdaptedGrid::regions);
  py::class_<InstanceParams>(m, "InstanceParams")
      .def(py::init<>())
      .def_readwrite("levels", &InstanceParams::levels)
      .def_readwrite("cubes_per_level", &InstanceParams::cubes_per_level)
      .def_readwrite("C_R", &InstanceParams::C_R)
      .def_readwrite("mu", &InstanceParams::mu);
  m.def("alpha_expansion", [](const DyadicSystem& sys, const std::vector<Cube>& fam,
                              double alpha) { return alpha_expansion(sys, fam, alpha); });
  m.def("adapt_alpha", &adapt_alpha);
  m.def("check_hypotheses", [](const DyadicSystem& sys, const AdaptInput& in) {
    HypothesesReport r = check_hypotheses(sys, in);
    return py::make_tuple(r.ok, r.violations);
  });
  m.def("build_adapted_grid", &build_adapted_grid);
  m.def("verify_adapted_grid", [](const DyadicSystem& sys, const AdaptInput& in,
                                  const AdaptedGrid& g) {
    GridReport r = verify_adapted_grid(sys, in, g);
    return py::make_tuple(r.ok, r.max_measure_ratio, r.violations);
  });
  m.def("random_admissible_instance", &random_admissible_instance);
  m.def("grid_to_json", &grid_to_json);

  // haar
  py::class_<CellFunction>(m, "CellFunction")
      .def_readwrite("v", &CellFunction::v)
      .def_static("zero", &CellFunction::zero);
  m.def("norm_p", &norm_p);
  m.def("norm_inf", &norm_inf);
  m.def("integral", &integral);
  m.def("inner_product", &inner_product);
  py::class_<HaarSystem>(m, "HaarSystem").def_readonly("sys", &HaarSystem::sys);
  m.def("make_haar", [](const DyadicSystem& sys) { return make_haar(sys); });
  m.def("haar_function", &haar_function);
  m.def("synthesize", [](const HaarSystem& h, const std::vector<Cube>& fam,
                         const std::vector<double>& c) {
    return synthesize(h, fam, {c.data(), c.size()});
  });
  m.def("analyze", [](const HaarSystem& h, const std::vector<Cube>& fam,
                      const CellFunction& f) { return analyze(h, fam, f); });
  py::class_<Filtration>(m, "Filtration").def_readonly("levels", &Filtration::levels);
  m.def("make_dyadic_filtration", &make_dyadic_filtration);
  m.def("conditional_expectation",
        [](const CellFunction& f, const Filtration& filt, int n) {
          return conditional_expectation(f, filt, n);
        });

  // shifts
  py::class_<CubePair>(m, "CubePair")
      .def(py::init([](const Cube& p, const Cube& q) { return CubePair{p, q}; }))
      .def_readonly("P", &CubePair::P)
      .def_readonly("Q", &CubePair::Q);
  py::class_<ShiftRelation>(m, "ShiftRelation")
      .def_readonly("pairs", &ShiftRelation::pairs)
      .def_readonly("m_param", &ShiftRelation::m_param)
      .def_readonly("partition", &ShiftRelation::partition);
  m.def(
      "make_axis_shift",
      [](const DyadicSystem& sys, int64_t mm, int axis, int level_lo, int level_hi) {
        if (level_hi < 0) level_hi = sys.model.J - 1;
        return make_axis_shift(sys, mm, axis, level_lo, level_hi);
      },
      py::arg("sys"), py::arg("m"), py::arg("axis") = 0, py::arg("level_lo") = 0,
      py::arg("level_hi") = -1);
  m.def("certify_relation", [](const DyadicSystem& sys, const HaarSystem& haar,
                               const ShiftRelation& tau) {
    RelationReport r = certify_relation(sys, haar, tau);
    return py::make_tuple(r.ok, r.C_h, r.violations);
  });
  py::class_<ShiftDecomposition>(m, "ShiftDecomposition")
      .def_readonly("M_k", &ShiftDecomposition::M_k)
      .def_readonly("ell", &ShiftDecomposition::ell)
      .def_readonly("C_R", &ShiftDecomposition::C_R);
  m.def("decompose", &decompose, py::arg("sys"), py::arg("tau"), py::arg("C_R"), py::arg("ell"),
        py::arg("tau_index") = 0, py::arg("conflict_radius") = 0.0);
  m.def("beta_constant", &beta_constant);
  m.def("ell_for_shift", &ell_for_shift);
  m.def("theta_conflict_radius", &theta_conflict_radius);
  m.def("check_localization", [](const DyadicSystem& sys, const ShiftDecomposition& dec) {
    LocalizationReport r = check_localization(sys, dec);
    return py::make_tuple(r.ok, r.c1, r.violations);
  });
  py::class_<ThetaSupports>(m, "ThetaSupports")
      .def_readonly("support", &ThetaSupports::support)
      .def_readonly("nested", &ThetaSupports::nested)
      .def_readonly("cover_ok", &ThetaSupports::cover_ok)
      .def_readonly("inclusion_ok", &ThetaSupports::inclusion_ok)
      .def_readonly("c4_star", &ThetaSupports::c4_star);
  m.def("build_theta", &build_theta);
  m.def("domination_check", [](const DyadicSystem& sys, const ShiftDecomposition& dec,
                               int color, int i, const ThetaSupports& theta,
                               const HaarSystem& haar) {
    DominationReport r = domination_check(sys, dec, color, i, theta, haar);
    return py::make_tuple(r.ok, r.c5_star, r.c5_bound, r.violations);
  });

  // stripes
  py::class_<StripeFamily>(m, "StripeFamily")
      .def_readonly("lambda_", &StripeFamily::lambda)
      .def_readonly("M", &StripeFamily::M);
  m.def("make_classical_stripes", &make_classical_stripes);
  m.def("stripe_cubes", &stripe_cubes);
  m.def("stripe_region", &stripe_region);
  m.def("verify_S1_S4", [](const DyadicSystem& sys, const StripeFamily& fam) {
    StripeReport r = verify_S1_S4(sys, fam);
    return py::make_tuple(r.ok, r.K1, r.K2, r.eps, r.violations);
  });
  py::class_<StripeFunctions>(m, "StripeFunctions")
      .def_readonly("C_g", &StripeFunctions::C_g);
  m.def("make_stripe_functions", &make_stripe_functions);
  m.def("stripe_g", &stripe_g);
  m.def("overlap_bound", [](const DyadicSystem& sys, const StripeFamily& fam, const Cube& a,
                            int sm, int sn, int k_gap) {
    OverlapBound r = overlap_bound(sys, fam, a, sm, sn, k_gap);
    return py::make_tuple(r.ok, r.lhs_measure, r.rhs_bound, r.K3);
  });
  m.def("build_stripe_carriers",
        [](const DyadicSystem& sys, const StripeFunctions& fns, const HaarSystem& haar, int sm,
           int sn, int nu, int delta, int k_gap) {
          StripeCarriers r = build_stripe_carriers(sys, fns, haar, sm, sn, nu, delta, k_gap);
          return py::make_tuple(r.nested, r.retention_ok, r.worst_retention,
                                static_cast<int>(r.cubes.size()));
        },
        py::arg("sys"), py::arg("fns"), py::arg("haar"), py::arg("m"), py::arg("n"),
        py::arg("nu"), py::arg("delta"), py::arg("k_gap") = 0);
  m.def("apply_stripe_operator",
        [](const DyadicSystem& sys, const StripeFunctions& fns, const HaarSystem& haar,
           const std::vector<Cube>& cubes, const std::vector<double>& coeffs, int sm) {
          return apply_stripe_operator(sys, fns, haar, cubes, {coeffs.data(), coeffs.size()},
                                       sm);
        });

  // norms
  py::class_<OperatorHandle>(m, "OperatorHandle")
      .def_readonly("descriptor", &OperatorHandle::descriptor)
      .def_property_readonly("domain_size",
                             [](const OperatorHandle& op) { return op.domain.size(); });
  m.def("make_shift_operator", &make_shift_operator, py::arg("sys"), py::arg("haar"),
        py::arg("tau"), py::arg("tau_index") = 0);
  m.def("make_class_operator", &make_class_operator);
  m.def("make_stripe_operator_handle", &make_stripe_operator_handle);
  py::class_<NormEstimate>(m, "NormEstimate")
      .def_readonly("p", &NormEstimate::p)
      .def_readonly("value", &NormEstimate::value)
      .def_readonly("iterations", &NormEstimate::iterations)
      .def_readonly("converged", &NormEstimate::converged)
      .def_readonly("witness", &NormEstimate::witness)
      .def_property_readonly("kind", [](const NormEstimate& e) {
        return e.kind == NormEstimate::Kind::Exact2 ? "exact2" : "lower_bound";
      });
  m.def("opnorm_exact_2", &opnorm_exact_2, py::arg("op"), py::arg("restarts") = 4,
        py::arg("seed") = 0, py::arg("max_iter") = 20000);
  m.def("opnorm_lower_p", &opnorm_lower_p, py::arg("op"), py::arg("p"), py::arg("restarts") = 4,
        py::arg("seed") = 0, py::arg("max_iter") = 500);
  m.def("witness_ratio", [](const OperatorHandle& op, const std::vector<double>& c, double p) {
    return witness_ratio(op, {c.data(), c.size()}, p);
  });
}
