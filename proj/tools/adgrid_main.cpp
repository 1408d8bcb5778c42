// Command-line driver: verification suites and norm experiments with
// machine-readable reports.  Exit codes: 0 pass, 1 usage/config error,
// 2 invariant violation, 3 numerical non-convergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "adgrid/adapt.hpp"
#include "adgrid/cubes.hpp"
#include "adgrid/haar.hpp"
#include "adgrid/model.hpp"
#include "adgrid/norms.hpp"
#include "adgrid/serialize.hpp"
#include "adgrid/shift.hpp"
#include "adgrid/stripe.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::map<std::string, std::string> kv;

  bool has(const std::string& k) const { return kv.count(k) > 0; }
  std::string get(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  int64_t get_int(const std::string& k, int64_t dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : std::stoll(it->second);
  }
  double get_double(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : std::stod(it->second);
  }
  std::vector<int64_t> get_int_list(const std::string& k,
                                    const std::vector<int64_t>& dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    std::vector<int64_t> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(std::stoll(item));
    }
    return out;
  }
  std::vector<double> get_double_list(const std::string& k,
                                      const std::vector<double>& dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
  }
};

const std::set<std::string> kKnownKeys = {
    "kind",       "k",          "J",           "seed",        "threads",
    "instances",  "C_R",        "mu",          "levels",      "cubes_per_level",
    "m_list",     "class_m_list", "p_list",    "lambda_list", "restarts",
    "dump_witness"};

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = strip(line.substr(0, eq));
    std::string val = strip(line.substr(eq + 1));
    if (!kKnownKeys.count(key))
      throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    cfg.kv[key] = val;
  }
  return cfg;
}

adgrid::SpaceModel model_from_config(const RunConfig& cfg) {
  std::string kind = cfg.get("kind", "torus_sup");
  adgrid::Kind k;
  if (kind == "torus_sup")
    k = adgrid::Kind::TorusSup;
  else if (kind == "torus_squared")
    k = adgrid::Kind::TorusSquared;
  else
    throw std::runtime_error("unknown kind '" + kind + "'");
  return adgrid::make_model(k, static_cast<int>(cfg.get_int("k", 1)),
                            static_cast<int>(cfg.get_int("J", 8)));
}

void write_resolved_config(const fs::path& out, const RunConfig& cfg,
                           const std::string& command, uint64_t seed, int threads) {
  std::map<std::string, std::string> resolved = cfg.kv;
  resolved["command"] = command;
  resolved["seed"] = std::to_string(seed);
  resolved["threads"] = std::to_string(threads);
  std::string text;
  for (const auto& [k, v] : resolved) text += k + "=" + v + "\n";
  adgrid::atomic_write_file((out / "resolved_config.txt").string(), text);
}

void write_report(const fs::path& out, json& report, int exit_code) {
  report["schema_version"] = 1;
  report["exit_code"] = exit_code;
  adgrid::atomic_write_file((out / "report.json").string(), report.dump(2) + "\n");
}

int cmd_verify_cubes(const RunConfig& cfg, const fs::path& out, uint64_t seed, bool faults) {
  json report;
  report["command"] = "verify-cubes";
  adgrid::SpaceModel model = model_from_config(cfg);
  adgrid::ModelReport quasi = adgrid::verify_quasimetric(model, 100000, seed);
  adgrid::ModelReport doubling = adgrid::verify_doubling(model);

  adgrid::DyadicSystem sys;
  sys.model = model;
  if (model.kind == adgrid::Kind::TorusSup) {
    sys.C_1 = 0.5; sys.C_2 = 1.0; sys.C_3 = 2.0 * model.k; sys.eta = 1.0;
  } else {
    sys.C_1 = 0.25; sys.C_2 = 0.5; sys.C_3 = 2.0; sys.eta = 0.5;
  }
  sys.N = 1 << model.k;
  if (faults) sys.C_3 /= 8.0;  // provoke the boundary-layer detector
  adgrid::CubeReport rep = adgrid::verify_system(sys);

  report["constants"] = {{"K_X", model.K_X}, {"C_d", model.C_d}, {"q", model.q},
                         {"C_1", rep.C_1},   {"C_2", rep.C_2},   {"C_3", rep.C_3},
                         {"eta", rep.eta},   {"N", rep.N}};
  report["quasimetric_ok"] = quasi.ok;
  report["doubling_ok"] = doubling.ok;
  report["cubes_ok"] = rep.ok;
  json viol = json::array();
  for (const auto& v : quasi.violations) viol.push_back(v);
  for (const auto& v : doubling.violations) viol.push_back(v);
  for (const auto& v : rep.violations) viol.push_back(v);
  report["violations"] = viol;
  bool ok = quasi.ok && doubling.ok && rep.ok;
  int code = ok ? 0 : 2;
  write_report(out, report, code);
  return code;
}

int cmd_adapt_demo(const RunConfig& cfg, const fs::path& out, uint64_t seed, int threads,
                   bool faults) {
  json report;
  report["command"] = "adapt-demo";
  adgrid::SpaceModel model = model_from_config(cfg);
  adgrid::DyadicSystem sys = adgrid::build_system(model);
  int instances = static_cast<int>(cfg.get_int("instances", 50));
  adgrid::InstanceParams params;
  params.C_R = cfg.get_double("C_R", 4.0);
  params.mu = static_cast<int>(cfg.get_int("mu", 3));
  params.levels = static_cast<int>(cfg.get_int("levels", 3));
  params.cubes_per_level = static_cast<int>(cfg.get_int("cubes_per_level", 6));

  struct Result {
    bool ok = true;
    double ratio = 0.0;
    std::string violation;
  };
  std::vector<Result> results(static_cast<size_t>(instances));
  adgrid::parallel_for(threads, instances, [&](int i) {
    adgrid::AdaptInput in =
        adgrid::random_admissible_instance(sys, seed + static_cast<uint64_t>(i), params);
    adgrid::HypothesesReport hyp = adgrid::check_hypotheses(sys, in);
    Result r;
    if (!hyp.ok) {
      r.ok = false;
      r.violation = hyp.violations.empty() ? "hypotheses" : hyp.violations.front();
    } else {
      adgrid::AdaptedGrid grid = adgrid::build_adapted_grid(sys, in);
      if (faults && !grid.regions.empty()) {
        // inflate one region beyond its diamond
        adgrid::Region& reg = grid.regions[0];
        adgrid::Region far = adgrid::diamond(sys, grid.family[0], in.C_R).complement();
        auto cells = far.cells();
        if (!cells.empty()) reg.set(cells[cells.size() / 2]);
      }
      adgrid::GridReport v = adgrid::verify_adapted_grid(sys, in, grid);
      r.ok = v.ok;
      r.ratio = v.max_measure_ratio;
      if (!v.ok && !v.violations.empty()) r.violation = v.violations.front();
    }
    results[static_cast<size_t>(i)] = r;
  });

  bool all_ok = true;
  double max_ratio = 0.0;
  json inst = json::array();
  for (int i = 0; i < instances; ++i) {
    const Result& r = results[static_cast<size_t>(i)];
    all_ok = all_ok && r.ok;
    max_ratio = std::max(max_ratio, r.ratio);
    json e;
    e["ok"] = r.ok;
    e["max_measure_ratio"] = r.ratio;
    if (!r.violation.empty()) e["violation"] = r.violation;
    inst.push_back(e);
  }
  report["instances"] = inst;
  report["all_ok"] = all_ok;
  report["max_measure_ratio"] = max_ratio;
  int code = all_ok ? 0 : 2;
  write_report(out, report, code);
  return code;
}

int cmd_shift_norms(const RunConfig& cfg, const fs::path& out, uint64_t seed, int threads,
                    bool faults) {
  (void)seed;
  json report;
  report["command"] = "shift-norms";
  adgrid::SpaceModel model = model_from_config(cfg);
  adgrid::DyadicSystem sys = adgrid::build_system(model);
  adgrid::HaarSystem haar = adgrid::make_haar(sys);
  double C_R = cfg.get_double("C_R", 4.0);
  report["beta"] = adgrid::beta_constant(sys, C_R);

  if (faults) {
    // localization with a halved diamond: the detector must fire
    adgrid::ShiftRelation tau = adgrid::make_axis_shift(sys, 2, 0, 0, model.J - 1);
    int ell = adgrid::ell_for_shift(sys, C_R, 2.0);
    adgrid::ShiftDecomposition dec = adgrid::decompose(sys, tau, C_R, ell);
    adgrid::LocalizationReport loc = adgrid::check_localization(sys, dec, 0.05);
    report["fault_localization_ok"] = loc.ok;
    report["violations"] = loc.violations;
    int code = loc.ok ? 0 : 2;
    write_report(out, report, code);
    return code;
  }

  std::vector<int64_t> m_list = cfg.get_int_list("m_list", {0, 1, 2, 4, 8});
  std::vector<int64_t> class_m = cfg.get_int_list("class_m_list", {});
  std::vector<double> p_list = cfg.get_double_list("p_list", {2.0});
  int restarts = static_cast<int>(cfg.get_int("restarts", 2));
  bool dump_witness = cfg.get_int("dump_witness", 0) != 0;

  // scalar L^p type/cotype, external inputs recorded with every run
  json tc = json::array();
  for (double p : p_list) {
    double T = std::min(2.0, p), C = std::max(2.0, p);
    tc.push_back({{"p", p}, {"type", T}, {"cotype", C}, {"alpha", 1.0 / T - 1.0 / C}});
  }
  report["type_cotype"] = tc;

  std::string csv = "operator,p,param,class,norm,kind,ell,M_k,witness_file\n";
  bool converged = true;
  struct Row {
    adgrid::ShiftNormRow r;
    adgrid::NormEstimate est;
    adgrid::CellFunction witness_fn;  // synthesized witness, dumped on request
  };
  std::vector<std::vector<Row>> per_p(p_list.size());
  for (size_t pi = 0; pi < p_list.size(); ++pi) {
    double p = p_list[pi];
    std::vector<Row>& rows = per_p[pi];
    std::mutex mu;
    adgrid::parallel_for(threads, static_cast<int>(m_list.size()), [&](int idx) {
      int64_t m = m_list[static_cast<size_t>(idx)];
      adgrid::ShiftRelation tau = adgrid::make_axis_shift(sys, m, 0, 0, model.J - 1);
      adgrid::OperatorHandle op = adgrid::make_shift_operator(sys, haar, tau);
      adgrid::NormEstimate est = p == 2.0
                                     ? adgrid::opnorm_exact_2(op, 4, 0)
                                     : adgrid::opnorm_lower_p(op, p, restarts, 0);
      adgrid::ShiftNormRow r;
      r.m = m;
      r.cls = "full";
      r.p = p;
      r.norm = est.value;
      r.kind = est.kind == adgrid::NormEstimate::Kind::Exact2 ? "exact2" : "lower_bound";
      r.ell = adgrid::ell_for_shift(sys, C_R, static_cast<double>(m));
      Row row{r, est, adgrid::CellFunction{}};
      if (dump_witness && !est.witness.empty())
        row.witness_fn = adgrid::apply_domain(op, est.witness);
      std::lock_guard<std::mutex> lk(mu);
      rows.push_back(std::move(row));
    });
    for (int64_t m : class_m) {
      if (m == 0) continue;
      adgrid::ShiftRelation tau = adgrid::make_axis_shift(sys, m, 0, 0, model.J - 1);
      int ell = adgrid::ell_for_shift(sys, C_R, static_cast<double>(m));
      adgrid::ShiftDecomposition dec = adgrid::decompose(sys, tau, C_R, ell);
      for (int j = 0; j < dec.M_k; ++j)
        for (int i = 0; i < ell; ++i) {
          if (dec.classes[static_cast<size_t>(j)][static_cast<size_t>(i)].empty()) continue;
          adgrid::OperatorHandle op = adgrid::make_class_operator(sys, haar, dec, j, i);
          adgrid::NormEstimate est = p == 2.0
                                         ? adgrid::opnorm_exact_2(op, 2, 0)
                                         : adgrid::opnorm_lower_p(op, p, restarts, 0);
          adgrid::ShiftNormRow r;
          r.m = m;
          r.cls = "j" + std::to_string(j) + "i" + std::to_string(i);
          r.p = p;
          r.norm = est.value;
          r.kind = est.kind == adgrid::NormEstimate::Kind::Exact2 ? "exact2" : "lower_bound";
          r.ell = ell;
          r.M_k = dec.M_k;
          Row row{r, est, adgrid::CellFunction{}};
          if (dump_witness && !est.witness.empty())
            row.witness_fn = adgrid::apply_domain(op, est.witness);
          rows.push_back(std::move(row));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.r.m != b.r.m) return a.r.m < b.r.m;
      return a.r.cls < b.r.cls;
    });
  }
  int witness_id = 0;
  for (size_t pi = 0; pi < p_list.size(); ++pi)
    for (const Row& row : per_p[pi]) {
      converged = converged && row.est.converged;
      std::string wfile;
      if (dump_witness && row.est.kind == adgrid::NormEstimate::Kind::LowerBound &&
          !row.witness_fn.v.empty()) {
        wfile = "witness_" + std::to_string(witness_id++) + ".csv";
        adgrid::export_csv(row.witness_fn, (out / wfile).string());
      }
      csv += adgrid::csv_row({"shift", adgrid::format_double(row.r.p),
                              std::to_string(row.r.m), row.r.cls,
                              adgrid::format_double(row.r.norm), row.r.kind,
                              std::to_string(row.r.ell), std::to_string(row.r.M_k), wfile});
    }
  adgrid::atomic_write_file((out / "shift_norms.csv").string(), csv);
  report["rows"] = static_cast<int>(csv.size());
  report["converged"] = converged;
  int code = converged ? 0 : 3;
  write_report(out, report, code);
  return code;
}

int cmd_stripe_norms(const RunConfig& cfg, const fs::path& out, uint64_t seed, int threads,
                     bool faults) {
  (void)threads;
  json report;
  report["command"] = "stripe-norms";
  adgrid::SpaceModel model = model_from_config(cfg);
  adgrid::DyadicSystem sys = adgrid::build_system(model);
  adgrid::HaarSystem haar = adgrid::make_haar(sys);

  if (faults) {
    // family with one stripe emptied into another: the (S1) detector fires
    adgrid::StripeFamily fam = adgrid::make_classical_stripes(sys, 1);
    adgrid::StripeFamily broken = fam;
    broken.classical = false;
    for (int lv = 0; lv + fam.lambda <= model.J; ++lv)
      for (int64_t f = 0; f < adgrid::cubes_at_level(model, lv); ++f) {
        adgrid::Cube a = adgrid::cube_from_flat(model, lv, f);
        std::vector<std::vector<adgrid::Cube>> stripes;
        auto s1 = adgrid::stripe_cubes(sys, fam, a, 1);
        auto s2 = adgrid::stripe_cubes(sys, fam, a, 2);
        s1.insert(s1.end(), s2.begin(), s2.end());
        stripes.push_back(s1);
        stripes.push_back({});
        broken.table[adgrid::cube_key(model, a)] = stripes;
      }
    adgrid::StripeReport rep = adgrid::verify_S1_S4(sys, broken);
    report["fault_s1_ok"] = rep.ok;
    report["violations"] = rep.violations;
    int code = rep.ok ? 0 : 2;
    write_report(out, report, code);
    return code;
  }

  std::vector<int64_t> lambda64 = cfg.get_int_list("lambda_list", {1, 2, 3});
  std::vector<int> lambdas(lambda64.begin(), lambda64.end());
  std::vector<double> p_list = cfg.get_double_list("p_list", {2.0});
  int restarts = static_cast<int>(cfg.get_int("restarts", 2));

  json tc = json::array();
  for (double p : p_list) {
    double T = std::min(2.0, p), C = std::max(2.0, p);
    tc.push_back({{"p", p}, {"type", T}, {"cotype", C}});
  }
  report["type_cotype"] = tc;

  std::string csv = "operator,p,lambda,M,norm,kind,envelope_lo,envelope_hi\n";
  for (double p : p_list) {
    auto rows = adgrid::stripe_norm_curve(sys, haar, lambdas, p, restarts, seed);
    for (const auto& r : rows)
      csv += adgrid::csv_row({"stripe", adgrid::format_double(r.p),
                              std::to_string(r.lambda), std::to_string(r.M),
                              adgrid::format_double(r.norm), r.kind,
                              adgrid::format_double(r.envelope_lo),
                              adgrid::format_double(r.envelope_hi)});
  }
  adgrid::atomic_write_file((out / "stripe_norms.csv").string(), csv);
  report["rows"] = static_cast<int>(csv.size());
  write_report(out, report, 0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic grid toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  uint64_t seed = 1;
  int threads = 1;
  bool faults = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_flag("--faults", faults, "run the fault-injection suite");
  };
  CLI::App* verify = app.add_subcommand("verify-cubes", "cube system axioms");
  CLI::App* adapt = app.add_subcommand("adapt-demo", "adapted-grid random instances");
  CLI::App* shiftn = app.add_subcommand("shift-norms", "rearrangement norm curves");
  CLI::App* stripen = app.add_subcommand("stripe-norms", "stripe norm curves");
  for (CLI::App* s : {verify, adapt, shiftn, stripen}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  fs::path out;
  CLI::App* active = app.get_subcommands().front();
  try {
    cfg = parse_config(config_path);
    // config provides defaults; explicit flags win
    if (cfg.has("seed") && active->count("--seed") == 0)
      seed = static_cast<uint64_t>(cfg.get_int("seed", 1));
    if (cfg.has("threads") && active->count("--threads") == 0)
      threads = static_cast<int>(cfg.get_int("threads", 1));
    out = fs::path(out_dir);
    if (!fs::exists(out)) {
      std::error_code ec;
      fs::create_directories(out, ec);
      if (ec) throw std::runtime_error("cannot create output dir " + out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::string command = active->get_name();
    write_resolved_config(out, cfg, command, seed, threads);
    int code = 1;
    if (verify->parsed())
      code = cmd_verify_cubes(cfg, out, seed, faults);
    else if (adapt->parsed())
      code = cmd_adapt_demo(cfg, out, seed, threads, faults);
    else if (shiftn->parsed())
      code = cmd_shift_norms(cfg, out, seed, threads, faults);
    else if (stripen->parsed())
      code = cmd_stripe_norms(cfg, out, seed, threads, faults);
    if (code != 0)
      std::cerr << command << ": finished with exit code " << code << "\n";
    return code;
  } catch (const adgrid::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
