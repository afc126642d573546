#include "sra/simulation.hpp"

#include <atomic>
#include <cmath>

#include "sra/errors.hpp"
#include "sra/parallel.hpp"
#include "sra/stats.hpp"

namespace sra {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PivotDiagnostics diagnose(const std::vector<double>& sample) {
  PivotDiagnostics pd;
  const auto m = stats::moments(sample);
  pd.mean = m.mean;
  pd.se = m.se_mean;
  pd.sd = m.sd;
  pd.skewness = m.skewness;
  pd.ks = stats::ks_distance_std_normal(sample);
  pd.coverage90 = stats::one_sided_coverage(sample, 0.90);
  pd.coverage95 = stats::one_sided_coverage(sample, 0.95);
  pd.coverage99 = stats::one_sided_coverage(sample, 0.99);
  return pd;
}

// Core replicate loop: simulate at theta_sim, evaluate pivots at psi0.
SimStudy run_study(const Model& model, const Eigen::VectorXd& theta_sim,
                   double psi0, const StudyOptions& opts) {
  const std::uint64_t B = opts.reps;
  SimStudy study;
  study.model_name = model.name();
  study.theta_sim = theta_sim;
  study.psi0 = psi0;
  study.reps = B;
  study.seed = opts.seed;
  study.workers = opts.workers;

  const std::vector<std::string> names = {"r",        "r_a",      "w",
                                          "wald_obs", "wald_exp", "score_obs",
                                          "score_exp", "psi_hat",  "m1"};
  std::map<std::string, std::vector<double>> buf;
  for (const auto& nm : names) buf[nm].assign(B, kNaN);
  double* c_r = buf["r"].data();
  double* c_ra = buf["r_a"].data();
  double* c_w = buf["w"].data();
  double* c_wo = buf["wald_obs"].data();
  double* c_we = buf["wald_exp"].data();
  double* c_so = buf["score_obs"].data();
  double* c_se = buf["score_exp"].data();
  double* c_ph = buf["psi_hat"].data();
  double* c_m1 = buf["m1"].data();

  parallel_chunks(B, opts.workers, [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t b = lo; b < hi; ++b) {
      RngStream rng(substream_seed(opts.seed, b));
      try {
        const Dataset d = model.sample(theta_sim, rng);
        const InferenceResult ir = pivots(model, d, psi0);
        c_r[b] = ir.r;
        c_ra[b] = ir.r_a;
        c_w[b] = ir.w;
        c_wo[b] = ir.wald_obs;
        c_we[b] = ir.wald_exp;
        c_so[b] = ir.score_obs;
        c_se[b] = ir.score_exp;
        c_ph[b] = ir.psi_hat;
        c_m1[b] = profile_derivatives(model, d, psi0).m1;
      } catch (const std::exception&) {
        // replicate failure: left as NaN, logged below
      }
    }
  });

  // Cornish-Fisher corrected Wald/score using the leading-order cumulants at
  // the simulation truth.
  if (opts.with_cornish_fisher) {
    const CumulantSet cs = model.cumulants(theta_sim, 3);
    const AdjustmentReport rep = adjustment_report(cs, info_geometry(cs.lam2));
    const PivotCumulants wald_pc = pivot_cumulants(rep, PivotKind::wald_exp);
    const PivotCumulants score_pc = pivot_cumulants(rep, PivotKind::score_exp);
    auto& cw = buf["cf_wald"];
    auto& csc = buf["cf_score"];
    cw.assign(B, kNaN);
    csc.assign(B, kNaN);
    for (std::uint64_t b = 0; b < B; ++b) {
      if (std::isfinite(buf["wald_exp"][b])) {
        cw[b] = cornish_fisher(buf["wald_exp"][b], wald_pc);
      }
      if (std::isfinite(buf["score_exp"][b])) {
        csc[b] = cornish_fisher(buf["score_exp"][b], score_pc);
      }
    }
  }

  // Compact failures in replicate order.
  for (std::uint64_t b = 0; b < B; ++b) {
    if (!std::isfinite(buf["r"][b])) {
      study.failures++;
      if (study.failed_reps.size() < 64) study.failed_reps.push_back(b);
    }
  }
  if (static_cast<double>(study.failures) >
      opts.failure_budget * static_cast<double>(B)) {
    throw NumericError("simulation: replicate failure rate " +
                       std::to_string(study.failures) + "/" + std::to_string(B) +
                       " exceeds the budget");
  }

  for (auto& [nm, vals] : buf) {
    std::vector<double> clean;
    clean.reserve(vals.size());
    for (double v : vals) {
      if (std::isfinite(v)) clean.push_back(v);
    }
    study.samples[nm] = std::move(clean);
  }
  for (const auto& [nm, vals] : study.samples) {
    if (!vals.empty()) study.diagnostics[nm] = diagnose(vals);
  }
  return study;
}

}  // namespace

SimStudy bootstrap_distribution(const Model& model, const Dataset& data,
                                double psi0, const StudyOptions& opts) {
  const MleResult tilde = constrained_mle(model, data, psi0);
  SimStudy study = run_study(model, tilde.theta, psi0, opts);

  const InferenceResult observed = pivots(model, data, psi0);
  const auto& rs = study.samples.at("r");
  auto& dr = study.diagnostics.at("r");
  dr.p_lower = stats::p_value_lower(rs, observed.r);
  dr.p_upper = stats::p_value_upper(rs, observed.r);
  return study;
}

SimStudy pivot_distribution(const Model& model, const Eigen::VectorXd& theta,
                            double psi0, const StudyOptions& opts) {
  return run_study(model, theta, psi0, opts);
}

ExpansionQuantity expansion_quantity_from_string(const std::string& s) {
  if (s == "ER") return ExpansionQuantity::er;
  if (s == "EW") return ExpansionQuantity::ew;
  if (s == "bias_psi_hat") return ExpansionQuantity::bias_psi_hat;
  if (s == "profile_score_mean") return ExpansionQuantity::profile_score_mean;
  if (s == "M3_diag") return ExpansionQuantity::m3_diag;
  throw ConfigError("unknown expansion quantity '" + s + "'");
}

std::string to_string(ExpansionQuantity q) {
  switch (q) {
    case ExpansionQuantity::er: return "ER";
    case ExpansionQuantity::ew: return "EW";
    case ExpansionQuantity::bias_psi_hat: return "bias_psi_hat";
    case ExpansionQuantity::profile_score_mean: return "profile_score_mean";
    case ExpansionQuantity::m3_diag: return "M3_diag";
  }
  return "?";
}

ExpansionReport verify_expansion(
    const std::function<ModelPtr(int)>& model_for_n,
    ExpansionQuantity quantity, const std::vector<int>& n_grid,
    const StudyOptions& opts) {
  constexpr double kSlackC = 2.0;
  ExpansionReport report;
  report.quantity = quantity;

  for (int n : n_grid) {
    const ModelPtr model = model_for_n(n);
    const Eigen::VectorXd theta = model->theta0();
    const double psi0 = theta(0);
    const int depth = quantity == ExpansionQuantity::ew ? 4 : 3;
    const CumulantSet cs = model->cumulants(theta, depth);
    const InfoGeometry geom = info_geometry(cs.lam2);
    const AdjustmentReport rep = adjustment_report(cs, geom);

    ExpansionCheck chk;
    chk.n = n;
    double center = 0.0;  // subtracted from the MC mean before comparison
    switch (quantity) {
      case ExpansionQuantity::er:
        chk.theory = -(rep.g_inf + rep.g_np);
        break;
      case ExpansionQuantity::ew:
        chk.theory = 1.0 + bartlett_decompose(cs, geom).b;
        break;
      case ExpansionQuantity::bias_psi_hat:
        chk.theory = mle_mean_expansion(rep);
        center = psi0;
        break;
      case ExpansionQuantity::profile_score_mean:
        chk.theory = profile_score_mean(rep);
        break;
      case ExpansionQuantity::m3_diag:
        chk.theory = 6.0 * rep.d_quant;
        break;
    }

    stats::SampleMoments m;
    if (quantity == ExpansionQuantity::m3_diag) {
      // Dedicated pass: third profile derivative at psi_hat over eta^{3/2}.
      const std::uint64_t B = opts.reps;
      std::vector<double> vals(B, kNaN);
      const double eta32 = std::pow(geom.eta, 1.5);
      parallel_chunks(B, opts.workers, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t b = lo; b < hi; ++b) {
          RngStream rng(substream_seed(opts.seed, b));
          try {
            const Dataset d = model->sample(theta, rng);
            const MleResult hat = mle(*model, d);
            vals[b] = profile_derivatives(*model, d, hat.theta(0)).m3 / eta32;
          } catch (const std::exception&) {
          }
        }
      });
      std::vector<double> clean;
      for (double v : vals) {
        if (std::isfinite(v)) clean.push_back(v);
      }
      m = stats::moments(clean);
    } else {
      std::string key;
      switch (quantity) {
        case ExpansionQuantity::er: key = "r"; break;
        case ExpansionQuantity::ew: key = "w"; break;
        case ExpansionQuantity::bias_psi_hat: key = "psi_hat"; break;
        case ExpansionQuantity::profile_score_mean: key = "m1"; break;
        case ExpansionQuantity::m3_diag: break;
      }
      const SimStudy study = pivot_distribution(*model, theta, psi0, opts);
      m = stats::moments(study.samples.at(key));
    }

    chk.mc = m.mean - center;
    chk.se = m.se_mean;
    chk.slack = kSlackC / static_cast<double>(model->total_obs());
    const double resid = chk.mc - chk.theory;
    chk.residual_times_n = resid * static_cast<double>(model->total_obs());
    const bool decisive = 4.0 * chk.se < std::max(std::abs(chk.theory), 1e-3);
    if (!decisive) {
      chk.verdict = "inconclusive";
    } else if (std::abs(resid) <= 4.0 * chk.se + chk.slack) {
      chk.verdict = "pass";
    } else {
      chk.verdict = "fail";
      report.all_passed = false;
    }
    report.checks.push_back(chk);
  }
  return report;
}

NormalityReport normality_comparison(const Model& model, double psi0,
                                     const StudyOptions& opts) {
  NormalityReport rep;
  rep.study = pivot_distribution(model, model.theta0(), psi0, opts);
  for (const std::string nm : {"r", "r_a", "cf_wald", "cf_score"}) {
    const auto it = rep.study.diagnostics.find(nm);
    if (it == rep.study.diagnostics.end()) continue;
    rep.ks[nm] = it->second.ks;
    const double e90 = std::abs(it->second.coverage90 - 0.90);
    const double e95 = std::abs(it->second.coverage95 - 0.95);
    const double e99 = std::abs(it->second.coverage99 - 0.99);
    rep.coverage_err[nm] = std::max({e90, e95, e99});
  }
  return rep;
}

}  // namespace sra
