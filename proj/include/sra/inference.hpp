#pragma once

#include <optional>

#include "sra/adjustments.hpp"
#include "sra/model.hpp"

namespace sra {

struct NewtonOptions {
  int max_iter = 200;
  double grad_tol = 1e-9;
};

struct MleResult {
  Eigen::VectorXd theta;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  double loglik = 0.0;
};

/// Damped Newton ascent on the analytic gradient/Hessian; positive parameters
/// are optimized on the log scale, indefiniteness is handled by ridging the
/// Hessian, and steps backtrack into the parameter domain.
MleResult mle(const Model& model, const Dataset& data,
              const NewtonOptions& opts = {});

/// Maximizes over the nuisance block with theta_0 = psi held fixed.
MleResult constrained_mle(const Model& model, const Dataset& data, double psi,
                          const NewtonOptions& opts = {},
                          const Eigen::VectorXd* warm_start = nullptr);

struct ProfileDerivs {
  double m1 = 0.0;  // dM/dpsi
  double jp = 0.0;  // -d2M/dpsi2
  double m3 = 0.0;  // d3M/dpsi3
};

/// Five-point central differences of the profile log-likelihood, stencil
/// spacing eta^{-1/2}/10.
ProfileDerivs profile_derivatives(const Model& model, const Dataset& data,
                                  double psi,
                                  const NewtonOptions& opts = {});

/// Which point estimates the adjustment constants in r_a: the constrained
/// MLE (default) or the global MLE.
enum class AdjustmentPlugin { tilde, hat };

struct InferenceResult {
  double psi_hat = 0.0;
  Eigen::VectorXd theta_hat;
  Eigen::VectorXd theta_tilde;
  double profile_ll = 0.0;   // M(psi)
  double w = 0.0;
  double r = 0.0;
  double r_a = 0.0;
  double g_inf_plugin = 0.0;
  double g_np_plugin = 0.0;
  double wald_obs = 0.0;
  double wald_exp = 0.0;
  double score_obs = 0.0;
  double score_exp = 0.0;
  double j_p = 0.0;          // profile observed information at psi_hat
  bool converged = false;
};

InferenceResult pivots(const Model& model, const Dataset& data, double psi,
                       AdjustmentPlugin plugin = AdjustmentPlugin::tilde,
                       const NewtonOptions& opts = {});

}  // namespace sra
