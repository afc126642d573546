#include "sra/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sra/adjustments.hpp"
#include "sra/errors.hpp"
#include "sra/geometry.hpp"
#include "sra/inference.hpp"
#include "sra/mc.hpp"
#include "sra/model.hpp"
#include "sra/parallel.hpp"
#include "sra/simulation.hpp"
#include "sra/tables.hpp"

namespace sra::cli {

using nlohmann::json;

json to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["model"] = cfg.model_name;
  j["model_config"] = cfg.model_config;
  j["format"] = cfg.format;
  j["out"] = cfg.out;
  j["precise"] = cfg.precise;
  j["seed"] = cfg.seed;
  j["reps"] = cfg.reps;
  if (cfg.psi0.has_value()) {
    j["psi0"] = *cfg.psi0;
  } else {
    j["psi0"] = nullptr;
  }
  j["workers"] = cfg.workers;
  j["table"] = cfg.table_which;
  j["kind"] = cfg.pivot_kind;
  j["quantity"] = cfg.quantity;
  j["n_grid"] = cfg.n_grid;
  j["provider"] = cfg.provider;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config document must be a JSON object");
  RunConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null()) {
      try {
        field = j.at(key).get<std::decay_t<decltype(field)>>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
      }
    }
  };
  get("command", cfg.command);
  get("model", cfg.model_name);
  if (j.contains("model_config") && !j.at("model_config").is_null()) {
    if (!j.at("model_config").is_object()) {
      throw ConfigError("config field 'model_config': must be an object");
    }
    cfg.model_config = j.at("model_config");
  }
  get("format", cfg.format);
  get("out", cfg.out);
  get("precise", cfg.precise);
  get("seed", cfg.seed);
  get("reps", cfg.reps);
  if (j.contains("psi0") && !j.at("psi0").is_null()) {
    cfg.psi0 = j.at("psi0").get<double>();
  }
  get("workers", cfg.workers);
  get("table", cfg.table_which);
  get("kind", cfg.pivot_kind);
  get("quantity", cfg.quantity);
  get("n_grid", cfg.n_grid);
  get("provider", cfg.provider);
  return cfg;
}

namespace {

int resolve_workers(const RunConfig& cfg) {
  return cfg.workers > 0 ? cfg.workers : default_workers();
}

ModelPtr model_from(const RunConfig& cfg) {
  if (cfg.model_name.empty()) {
    throw ConfigError(cfg.command + ": --model is required");
  }
  return build_model(cfg.model_name, cfg.model_config);
}

CumulantSet cumulants_from(const RunConfig& cfg, const Model& model,
                           const Eigen::VectorXd& theta, int depth) {
  if (cfg.provider == "analytic") {
    return model.cumulants(theta, depth);
  }
  if (cfg.provider == "mc") {
    McOptions mo;
    mo.reps = cfg.reps;
    mo.seed = cfg.seed;
    mo.depth = depth;
    mo.workers = resolve_workers(cfg);
    return cumulants_mc(model, theta, mo);
  }
  throw ConfigError("provider must be 'analytic' or 'mc'");
}

json adjustment_json(const AdjustmentReport& rep) {
  json r;
  r["g_inf"] = rep.g_inf;
  r["g_np"] = rep.g_np;
  r["d"] = rep.d_quant;
  r["rho"] = rep.rho;
  if (rep.ratio.has_value()) {
    r["ratio"] = *rep.ratio;
  } else {
    r["ratio"] = nullptr;
  }
  r["eta"] = rep.eta;
  r["a0"] = rep.a0;
  r["z0"] = rep.z0;
  r["er_leading"] = rep.er_leading;
  r["provenance"] = to_string(rep.provenance);
  return r;
}

json cmd_adjust(const RunConfig& cfg) {
  const ModelPtr model = model_from(cfg);
  const Eigen::VectorXd theta = model->theta0();
  const CumulantSet cs = cumulants_from(cfg, *model, theta, 3);
  const AdjustmentReport rep = adjustment_report(cs, info_geometry(cs.lam2));
  return adjustment_json(rep);
}

json cmd_bartlett(const RunConfig& cfg) {
  const ModelPtr model = model_from(cfg);
  const Eigen::VectorXd theta = model->theta0();
  const CumulantSet cs = cumulants_from(cfg, *model, theta, 4);
  const BartlettDecomposition bd = bartlett_decompose(cs, info_geometry(cs.lam2));
  json r;
  r["b"] = bd.b;
  r["b_inf"] = bd.b_inf;
  r["b_np"] = bd.b_np;
  r["b_np_explicit"] = bd.b_np_explicit;
  r["provenance"] = to_string(cs.provenance);
  return r;
}

json cmd_pivots(const RunConfig& cfg) {
  const ModelPtr model = model_from(cfg);
  const Eigen::VectorXd theta = model->theta0();
  const CumulantSet cs = cumulants_from(cfg, *model, theta, 3);
  const AdjustmentReport rep = adjustment_report(cs, info_geometry(cs.lam2));
  std::vector<PivotKind> kinds;
  if (cfg.pivot_kind.empty()) {
    kinds = {PivotKind::signed_root, PivotKind::wald_obs, PivotKind::wald_exp,
             PivotKind::score_obs, PivotKind::score_exp,
             PivotKind::adj_signed_root, PivotKind::adj_wald,
             PivotKind::adj_score};
  } else {
    kinds = {pivot_kind_from_string(cfg.pivot_kind)};
  }
  json arr = json::array();
  for (PivotKind k : kinds) {
    const PivotCumulants pc = pivot_cumulants(rep, k);
    json e;
    e["pivot_kind"] = to_string(k);
    e["kappa1"] = pc.kappa1;
    e["kappa3"] = pc.kappa3;
    arr.push_back(e);
  }
  json r;
  r["adjustments"] = adjustment_json(rep);
  r["pivots"] = arr;
  return r;
}

std::string format_entry(double v, bool precise) {
  std::ostringstream os;
  if (precise) {
    os.precision(17);
    os << v;
  } else {
    os.setf(std::ios::fixed);
    os.precision(2);
    os << round2(v);
  }
  return os.str();
}

json cmd_table(const RunConfig& cfg, std::string* csv) {
  const RatioTable t = ratio_table(cfg.table_which);
  json r;
  r["table"] = t.table_id;
  r["q"] = t.qs;
  json ra = json::array(), rb = json::array();
  std::ostringstream os;
  os << "case";
  for (int q : t.qs) os << "," << q;
  os << "\n";
  os << "a";
  for (std::size_t i = 0; i < t.qs.size(); ++i) {
    const double v = cfg.precise ? t.row_a[i] : round2(t.row_a[i]);
    ra.push_back(v);
    os << "," << format_entry(t.row_a[i], cfg.precise);
  }
  os << "\n";
  os << "b";
  for (std::size_t i = 0; i < t.qs.size(); ++i) {
    const double v = cfg.precise ? t.row_b[i] : round2(t.row_b[i]);
    rb.push_back(v);
    os << "," << format_entry(t.row_b[i], cfg.precise);
  }
  os << "\n";
  r["a"] = ra;
  r["b"] = rb;
  if (csv) *csv = os.str();
  return r;
}

Dataset dataset_from(const RunConfig& cfg, const Model& model) {
  if (cfg.model_config.contains("data")) {
    const auto& node = cfg.model_config.at("data");
    if (!node.is_array() || node.empty()) {
      throw ConfigError("model_config.data must be a non-empty array of rows");
    }
    const int rows = static_cast<int>(node.size());
    const int cols = static_cast<int>(node.at(0).size());
    Dataset d;
    d.y.resize(rows, cols);
    for (int i = 0; i < rows; ++i) {
      const auto& row = node.at(static_cast<std::size_t>(i));
      if (static_cast<int>(row.size()) != cols) {
        throw ConfigError("model_config.data rows must have equal length");
      }
      for (int j = 0; j < cols; ++j) {
        d.y(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
      }
    }
    return d;
  }
  // Generate observed data from theta0 on a stream separated from the
  // bootstrap replicate streams.
  const std::uint64_t data_seed =
      cfg.model_config.value("data_seed", cfg.seed ^ 0x5851F42D4C957F2DULL);
  RngStream rng(substream_seed(data_seed, 0));
  return model.sample(model.theta0(), rng);
}

json diag_json(const PivotDiagnostics& pd) {
  json e;
  e["mean"] = pd.mean;
  e["se"] = pd.se;
  e["sd"] = pd.sd;
  e["skewness"] = pd.skewness;
  e["ks"] = pd.ks;
  e["coverage"] = {{"90", pd.coverage90}, {"95", pd.coverage95}, {"99", pd.coverage99}};
  if (pd.p_lower.has_value()) e["p_lower"] = *pd.p_lower;
  if (pd.p_upper.has_value()) e["p_upper"] = *pd.p_upper;
  return e;
}

json cmd_bootstrap(const RunConfig& cfg) {
  const ModelPtr model = model_from(cfg);
  const Dataset data = dataset_from(cfg, *model);
  const double psi0 = cfg.psi0.value_or(model->theta0()(0));
  StudyOptions so;
  so.reps = cfg.reps;
  so.seed = cfg.seed;
  so.workers = resolve_workers(cfg);
  const SimStudy study = bootstrap_distribution(*model, data, psi0, so);
  json r;
  r["psi0"] = psi0;
  r["reps"] = study.reps;
  r["failures"] = study.failures;
  json diags;
  for (const auto& [nm, pd] : study.diagnostics) diags[nm] = diag_json(pd);
  r["diagnostics"] = diags;
  return r;
}

json cmd_verify(const RunConfig& cfg) {
  if (cfg.model_name.empty()) throw ConfigError("verify: --model is required");
  std::vector<int> grid = cfg.n_grid;
  if (grid.empty()) {
    grid = {cfg.model_config.value("n", 20)};
  }
  auto factory = [&](int n) {
    json mc = cfg.model_config;
    mc["n"] = n;
    return build_model(cfg.model_name, mc);
  };
  StudyOptions so;
  so.reps = cfg.reps;
  so.seed = cfg.seed;
  so.workers = resolve_workers(cfg);
  const ExpansionReport rep = verify_expansion(
      factory, expansion_quantity_from_string(cfg.quantity), grid, so);
  json r;
  r["quantity"] = to_string(rep.quantity);
  r["all_passed"] = rep.all_passed;
  json arr = json::array();
  for (const auto& c : rep.checks) {
    json e;
    e["n"] = c.n;
    e["mc"] = c.mc;
    e["se"] = c.se;
    e["theory"] = c.theory;
    e["slack"] = c.slack;
    e["residual_times_n"] = c.residual_times_n;
    e["verdict"] = c.verdict;
    arr.push_back(e);
  }
  r["checks"] = arr;
  return r;
}

json validate_one(const RunConfig& cfg, const std::string& name) {
  json mc_cfg = cfg.model_config;
  const ModelPtr model = build_model(name, mc_cfg);
  const Eigen::VectorXd theta = model->theta0();
  json r;
  r["model"] = name;
  bool ok = true;

  // Analytic identities.
  const CumulantSet cs = model->cumulants(theta, 3);
  const IdentityResiduals ir = identity_residuals(cs);
  const double tol = 1e-8 * ir.scale;
  r["analytic"] = {{"first_bartlett", ir.first_bartlett},
                   {"second_bartlett", ir.second_bartlett},
                   {"dlam2_consistency", ir.dlam2_consistency},
                   {"scale", ir.scale}};
  ok = ok && ir.first_bartlett <= tol && ir.second_bartlett <= tol &&
       ir.dlam2_consistency <= tol;

  // nu^{1s} = 0 and eta > 0.
  const InfoGeometry g = info_geometry(cs.lam2);
  double nu_row = 0.0;
  for (int s = 0; s < g.dim; ++s) nu_row = std::max(nu_row, std::abs(g.nu(0, s)));
  r["nu_first_row"] = nu_row;
  r["eta"] = g.eta;
  ok = ok && nu_row <= 1e-12 * ir.scale && g.eta > 0.0;

  // MC agreement within 4 standard errors, elementwise.
  McOptions mo;
  mo.reps = cfg.reps;
  mo.seed = cfg.seed;
  mo.depth = 3;
  mo.workers = resolve_workers(cfg);
  const CumulantSet mcs = cumulants_mc(*model, theta, mo);
  double worst_z = 0.0;
  auto zcheck = [&](const SymTensor& a, const SymTensor& m, const SymTensor& se) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double s = std::max(se.data()[i], 1e-9 * ir.scale);
      worst_z = std::max(worst_z, std::abs(m.data()[i] - a.data()[i]) / s);
    }
  };
  zcheck(cs.lam2, mcs.lam2, *mcs.mc.se_lam2);
  zcheck(cs.lam11, mcs.lam11, *mcs.mc.se_lam11);
  zcheck(cs.lam3, mcs.lam3, *mcs.mc.se_lam3);
  zcheck(cs.lam21, mcs.lam21, *mcs.mc.se_lam21);
  zcheck(cs.lam111, mcs.lam111, *mcs.mc.se_lam111);
  r["mc_agreement_max_z"] = worst_z;
  r["mc_reps"] = mo.reps;
  ok = ok && worst_z <= 4.0;

  // O(n) scaling: doubling n doubles lam2 for stratified builds.
  if (mc_cfg.is_object()) {
    json cfg2 = mc_cfg;
    const int n1 = cfg2.value("n", 10);
    cfg2["n"] = 2 * n1;
    const ModelPtr m2 = build_model(name, cfg2);
    const CumulantSet cs2 = m2->cumulants(m2->theta0(), 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < cs.lam2.size(); ++i) {
      worst = std::max(worst, std::abs(cs2.lam2.data()[i] - 2.0 * cs.lam2.data()[i]));
    }
    r["scaling_residual"] = worst;
    ok = ok && worst <= 1e-8 * ir.scale;
  }

  r["ok"] = ok;
  return r;
}

json cmd_validate(const RunConfig& cfg) {
  std::vector<std::string> names;
  if (!cfg.model_name.empty() && cfg.model_name != "all") {
    names = {cfg.model_name};
  } else {
    names = registered_models();
  }
  json r;
  json arr = json::array();
  bool all_ok = true;
  for (const auto& nm : names) {
    json one = validate_one(cfg, nm);
    all_ok = all_ok && one["ok"].get<bool>();
    arr.push_back(std::move(one));
  }
  r["models"] = arr;
  r["ok"] = all_ok;
  if (!all_ok) {
    throw ValidationError("validation failed: " + r.dump());
  }
  return r;
}

}  // namespace

RunOutput run_command(const RunConfig& cfg) {
  RunOutput out;
  json result;
  if (cfg.command == "adjust") {
    result = cmd_adjust(cfg);
  } else if (cfg.command == "bartlett") {
    result = cmd_bartlett(cfg);
  } else if (cfg.command == "pivots") {
    result = cmd_pivots(cfg);
  } else if (cfg.command == "table") {
    result = cmd_table(cfg, cfg.format == "csv" ? &out.csv : nullptr);
  } else if (cfg.command == "bootstrap") {
    result = cmd_bootstrap(cfg);
  } else if (cfg.command == "verify") {
    result = cmd_verify(cfg);
  } else if (cfg.command == "validate") {
    result = cmd_validate(cfg);
  } else {
    throw ConfigError("unknown command '" + cfg.command + "'");
  }
  out.doc = json{{"config", to_json(cfg)}, {"result", std::move(result)}};
  return out;
}

int emit_output(const RunConfig& cfg, const RunOutput& out) {
  const bool csv = cfg.format == "csv" && !out.csv.empty();
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw ConfigError("cannot open output file '" + cfg.out + "'");
    f << (csv ? out.csv : out.doc.dump(2) + "\n");
    if (csv) {
      // The config echo accompanies file output on stdout.
      std::cout << out.doc["config"].dump() << "\n";
    }
    return kExitOk;
  }
  if (csv) {
    std::cout << out.doc["config"].dump() << "\n\n" << out.csv;
  } else {
    std::cout << out.doc.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace sra::cli
