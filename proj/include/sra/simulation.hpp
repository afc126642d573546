#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sra/inference.hpp"
#include "sra/model.hpp"

namespace sra {

struct PivotDiagnostics {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double ks = 0.0;                       // vs standard normal
  double coverage90 = 0.0, coverage95 = 0.0, coverage99 = 0.0;
  std::optional<double> p_lower, p_upper;  // for the observed statistic
};

struct SimStudy {
  std::string model_name;
  Eigen::VectorXd theta_sim;               // simulation truth
  double psi0 = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::map<std::string, std::vector<double>> samples;
  std::map<std::string, PivotDiagnostics> diagnostics;
  std::uint64_t failures = 0;
  std::vector<std::uint64_t> failed_reps;
};

struct StudyOptions {
  std::uint64_t reps = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  double failure_budget = 0.01;
  bool with_cornish_fisher = true;
};

/// Parametric bootstrap: simulates from theta-tilde(psi0) fitted to `data`,
/// evaluates the pivots at psi0 per replicate, and reports the empirical
/// distributions plus tail p-values for the observed signed root.
SimStudy bootstrap_distribution(const Model& model, const Dataset& data,
                                double psi0, const StudyOptions& opts);

/// Simulates from `theta` directly (no observed data); used for the
/// normality comparisons and expansion checks.
SimStudy pivot_distribution(const Model& model, const Eigen::VectorXd& theta,
                            double psi0, const StudyOptions& opts);

enum class ExpansionQuantity { er, ew, bias_psi_hat, profile_score_mean, m3_diag };
ExpansionQuantity expansion_quantity_from_string(const std::string& s);
std::string to_string(ExpansionQuantity q);

struct ExpansionCheck {
  int n = 0;                 // per-stratum size of this run
  double mc = 0.0;           // Monte-Carlo estimate
  double se = 0.0;
  double theory = 0.0;       // leading-term prediction
  double slack = 0.0;        // C / total_obs allowance
  double residual_times_n = 0.0;
  std::string verdict;       // pass | fail | inconclusive
};

struct ExpansionReport {
  ExpansionQuantity quantity;
  std::vector<ExpansionCheck> checks;
  bool all_passed = true;
};

/// Compares MC means against the leading-order theory across an n grid.
/// The slack constant C = 2.0 (documented) absorbs the un-modelled next-order
/// term as C / total sample size.
ExpansionReport verify_expansion(
    const std::function<ModelPtr(int)>& model_for_n,
    ExpansionQuantity quantity, const std::vector<int>& n_grid,
    const StudyOptions& opts);

struct NormalityReport {
  SimStudy study;
  // name -> (KS distance, max one-sided coverage error over 90/95/99)
  std::map<std::string, double> ks;
  std::map<std::string, double> coverage_err;
};

NormalityReport normality_comparison(const Model& model, double psi0,
                                     const StudyOptions& opts);

}  // namespace sra
