#pragma once

#include "sra/model.hpp"
#include "sra/param_map.hpp"

namespace sra {

/// y_i = x_i' beta + sigma eps_i with known design X (n x q); theta =
/// (sigma, beta_1..beta_q). Dataset: n x 1.
ModelPtr make_normal_regression(Eigen::MatrixXd X, double sigma0,
                                Eigen::VectorXd beta0);

/// Y_ij ~ N(mu_j, sigma^2), i <= n per stratum, j <= q; theta =
/// (sigma, mu_1..mu_q). Dataset: n x q.
ModelPtr make_neyman_scott(int n, int q, double sigma0, Eigen::VectorXd mu0);

/// Y_ij ~ N(mu, sigma_j^2); theta = (mu, sigma_1..sigma_q). Dataset: n x q.
ModelPtr make_behrens_fisher(int n, int q, double mu0, Eigen::VectorXd sigmas0);

/// Y_i ~ Exp with mean phi_1 * exp(-psi z_i - phi_2 w_i), centered covariates;
/// theta = (psi, phi_1[, phi_2]). Pass an empty w for the single-covariate
/// variant. Dataset: n x 1.
ModelPtr make_exp_regression(Eigen::VectorXd z, Eigen::VectorXd w, double psi0,
                             double phi10, double phi20);

/// Inverse Gaussian strata with common shape-like interest psi; theta =
/// (psi, phi_1..phi_q). Dataset: n x q.
ModelPtr make_inverse_gaussian(int n, int q, double psi0, Eigen::VectorXd phi0);

/// Y_ij ~ Exp(rate phi_j); interest psi = q^{-1} sum_j exp(-phi_j t0);
/// theta = (psi, phi_2..phi_q). Dataset: n x q.
ModelPtr make_multi_exp(int n, int q, double t0, Eigen::VectorXd rates0);

/// Y_ij ~ N(mu_j, psi sqrt(mu_j)); theta = (psi, mu_1..mu_q). Dataset: n x q.
ModelPtr make_curved_normal(int n, int q, double psi0, Eigen::VectorXd mu0);

/// Orthogonalized variants used by the orthogonal-reduction cross-checks.
/// The nuisance coordinates are transformed so the expected information is
/// block-diagonal in (interest, nuisance) identically in theta.
ModelPtr make_inverse_gaussian_orthogonal(int n, int q, double psi0,
                                          Eigen::VectorXd mu0);
ModelPtr make_curved_normal_orthogonal(int n, int q, double psi0,
                                       Eigen::VectorXd u0);

/// Wraps a model with a smooth reparameterization theta_new -> theta_base,
/// psi-map monotone increasing. `inverse` maps base coordinates back to the
/// new ones (used for optimizer warm starts).
ModelPtr reparameterize(ModelPtr base, ParamMap map,
                        std::function<Eigen::VectorXd(const Eigen::VectorXd&)>
                            inverse,
                        std::vector<ParamScale> scales, std::string name,
                        Eigen::VectorXd theta0);

}  // namespace sra
