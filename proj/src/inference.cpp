#include "sra/inference.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "sra/errors.hpp"
#include "sra/geometry.hpp"

namespace sra {

namespace {

// Internal coordinates: z_i = log(theta_i) for positive-scale components.
struct Transform {
  std::vector<ParamScale> scales;

  Eigen::VectorXd to_z(const Eigen::VectorXd& th) const {
    Eigen::VectorXd z = th;
    for (int i = 0; i < th.size(); ++i) {
      if (scales[static_cast<std::size_t>(i)] == ParamScale::positive) {
        z(i) = std::log(th(i));
      }
    }
    return z;
  }
  Eigen::VectorXd to_theta(const Eigen::VectorXd& z) const {
    Eigen::VectorXd th = z;
    for (int i = 0; i < z.size(); ++i) {
      if (scales[static_cast<std::size_t>(i)] == ParamScale::positive) {
        th(i) = std::exp(z(i));
      }
    }
    return th;
  }
};

// Newton ascent over the active subset of coordinates.
MleResult newton_optimize(const Model& model, const Dataset& data,
                          const Eigen::VectorXd& start,
                          const std::vector<int>& active,
                          const NewtonOptions& opts) {
  const Transform tr{model.scales()};
  const int k = static_cast<int>(active.size());
  Eigen::VectorXd theta = start;
  if (!model.in_domain(theta)) {
    throw NumericError(model.name() + ": optimizer start outside the domain");
  }
  Eigen::VectorXd z = tr.to_z(theta);

  auto eval_active = [&](const Eigen::VectorXd& zz, double* value,
                         Eigen::VectorXd* gz, Eigen::MatrixXd* hz,
                         Eigen::VectorXd* gtheta) {
    const Eigen::VectorXd th = tr.to_theta(zz);
    const LoglikEval ev = model.loglik(th, data);
    if (value) *value = ev.value;
    if (gtheta) {
      gtheta->resize(k);
      for (int a = 0; a < k; ++a) (*gtheta)(a) = ev.grad(active[static_cast<std::size_t>(a)]);
    }
    if (!gz) return;
    gz->resize(k);
    hz->resize(k, k);
    Eigen::VectorXd dthdz = Eigen::VectorXd::Ones(th.size());
    for (int i = 0; i < th.size(); ++i) {
      if (tr.scales[static_cast<std::size_t>(i)] == ParamScale::positive) dthdz(i) = th(i);
    }
    for (int a = 0; a < k; ++a) {
      const int i = active[static_cast<std::size_t>(a)];
      (*gz)(a) = ev.grad(i) * dthdz(i);
      for (int bb = 0; bb < k; ++bb) {
        const int j = active[static_cast<std::size_t>(bb)];
        (*hz)(a, bb) = ev.hess(i, j) * dthdz(i) * dthdz(j);
      }
      if (tr.scales[static_cast<std::size_t>(i)] == ParamScale::positive) {
        (*hz)(a, a) += ev.grad(i) * dthdz(i);
      }
    }
  };

  MleResult res;
  double value = 0.0;
  Eigen::VectorXd gz, gtheta;
  Eigen::MatrixXd hz;
  eval_active(z, &value, &gz, &hz, &gtheta);

  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    res.grad_norm = gtheta.lpNorm<Eigen::Infinity>();
    if (res.grad_norm < opts.grad_tol) {
      res.converged = true;
      break;
    }
    // Newton direction with ridge escalation until it is an ascent direction.
    Eigen::MatrixXd A = -hz;
    const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
    double mu = 0.0;
    Eigen::VectorXd p;
    for (int trial = 0; trial < 60; ++trial) {
      Eigen::LLT<Eigen::MatrixXd> llt(A + mu * Eigen::MatrixXd::Identity(k, k));
      if (llt.info() == Eigen::Success) {
        p = llt.solve(gz);
        if (p.dot(gz) > 0.0 && p.allFinite()) break;
      }
      mu = (mu == 0.0) ? 1e-8 * scale : mu * 10.0;
      p.setZero();
    }
    if (p.size() == 0 || p.dot(gz) <= 0.0) {
      throw NumericError(model.name() + ": Newton direction failed");
    }
    // Backtracking line search staying inside the domain.
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd z_new = z;
      for (int a = 0; a < k; ++a) z_new(active[static_cast<std::size_t>(a)]) += step * p(a);
      const Eigen::VectorXd th_new = tr.to_theta(z_new);
      if (model.in_domain(th_new)) {
        double v_new = 0.0;
        Eigen::VectorXd gz_new, gth_new;
        Eigen::MatrixXd hz_new;
        try {
          eval_active(z_new, &v_new, &gz_new, &hz_new, &gth_new);
        } catch (const std::exception&) {
          v_new = -std::numeric_limits<double>::infinity();
        }
        if (std::isfinite(v_new) &&
            v_new >= value + 1e-4 * step * p.dot(gz)) {
          z = z_new;
          value = v_new;
          gz = gz_new;
          hz = hz_new;
          gtheta = gth_new;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Stalled: accept convergence only if the score is already tiny.
      if (gtheta.lpNorm<Eigen::Infinity>() < 1e2 * opts.grad_tol) {
        res.converged = true;
        break;
      }
      throw NumericError(model.name() + ": line search failed (score norm " +
                         std::to_string(gtheta.lpNorm<Eigen::Infinity>()) + ")");
    }
  }
  res.grad_norm = gtheta.lpNorm<Eigen::Infinity>();
  if (!res.converged && res.grad_norm < opts.grad_tol) res.converged = true;
  if (!res.converged) {
    throw NumericError(model.name() + ": optimizer did not converge (score norm " +
                       std::to_string(res.grad_norm) + ")");
  }
  res.theta = tr.to_theta(z);
  res.loglik = value;
  return res;
}

}  // namespace

MleResult mle(const Model& model, const Dataset& data, const NewtonOptions& opts) {
  model.validate_data(data);
  std::vector<int> active(static_cast<std::size_t>(model.dim()));
  for (int i = 0; i < model.dim(); ++i) active[static_cast<std::size_t>(i)] = i;
  return newton_optimize(model, data, model.init_guess(data), active, opts);
}

MleResult constrained_mle(const Model& model, const Dataset& data, double psi,
                          const NewtonOptions& opts,
                          const Eigen::VectorXd* warm_start) {
  model.validate_data(data);
  Eigen::VectorXd start =
      warm_start != nullptr ? *warm_start : model.init_guess(data);
  start(0) = psi;
  if (model.dim() == 1) {
    MleResult res;
    res.theta = start;
    res.converged = true;
    res.loglik = model.loglik(start, data).value;
    return res;
  }
  std::vector<int> active(static_cast<std::size_t>(model.dim() - 1));
  for (int i = 1; i < model.dim(); ++i) active[static_cast<std::size_t>(i - 1)] = i;
  return newton_optimize(model, data, start, active, opts);
}

namespace {

double eta_at(const Model& model, const Eigen::VectorXd& theta) {
  const CumulantSet cs = model.cumulants(theta, 3);
  return info_geometry(cs.lam2).eta;
}

// Profile values on the 5-point stencil around psi.
struct Stencil {
  double h = 0.0;
  std::array<double, 5> m{};  // M(psi + k h), k = -2..2
};

Stencil profile_stencil(const Model& model, const Dataset& data, double psi,
                        const NewtonOptions& opts) {
  const MleResult center = constrained_mle(model, data, psi, opts);
  double h = 0.1 / std::sqrt(eta_at(model, center.theta));
  const bool positive = model.scales()[0] == ParamScale::positive;
  if (positive) {
    int shrink = 0;
    while (psi - 2.0 * h <= 1e-4 * psi && shrink++ < 60) h *= 0.5;
    if (psi - 2.0 * h <= 0.0) {
      throw NumericError("profile_derivatives: stencil crosses the parameter boundary");
    }
  }
  Stencil st;
  st.h = h;
  st.m[2] = center.loglik;
  Eigen::VectorXd warm = center.theta;
  for (int k : {1, 2}) {
    const MleResult up = constrained_mle(model, data, psi + k * h, opts, &warm);
    st.m[static_cast<std::size_t>(2 + k)] = up.loglik;
    warm = up.theta;
  }
  warm = center.theta;
  for (int k : {1, 2}) {
    const MleResult dn = constrained_mle(model, data, psi - k * h, opts, &warm);
    st.m[static_cast<std::size_t>(2 - k)] = dn.loglik;
    warm = dn.theta;
  }
  return st;
}

}  // namespace

ProfileDerivs profile_derivatives(const Model& model, const Dataset& data,
                                  double psi, const NewtonOptions& opts) {
  const Stencil st = profile_stencil(model, data, psi, opts);
  const double h = st.h;
  ProfileDerivs pd;
  pd.m1 = (-st.m[4] + 8.0 * st.m[3] - 8.0 * st.m[1] + st.m[0]) / (12.0 * h);
  const double m2 = (-st.m[4] + 16.0 * st.m[3] - 30.0 * st.m[2] +
                     16.0 * st.m[1] - st.m[0]) /
                    (12.0 * h * h);
  pd.jp = -m2;
  pd.m3 = (st.m[4] - 2.0 * st.m[3] + 2.0 * st.m[1] - st.m[0]) / (2.0 * h * h * h);
  return pd;
}

InferenceResult pivots(const Model& model, const Dataset& data, double psi,
                       AdjustmentPlugin plugin, const NewtonOptions& opts) {
  const MleResult hat = mle(model, data, opts);
  Eigen::VectorXd warm = hat.theta;
  const MleResult tilde = constrained_mle(model, data, psi, opts, &warm);

  InferenceResult ir;
  ir.theta_hat = hat.theta;
  ir.theta_tilde = tilde.theta;
  ir.psi_hat = hat.theta(0);
  ir.profile_ll = tilde.loglik;
  ir.converged = hat.converged && tilde.converged;

  double w = 2.0 * (hat.loglik - tilde.loglik);
  if (w < 0.0) {
    if (w < -1e-8 * std::max(1.0, std::abs(hat.loglik))) {
      throw NumericError("pivots: profile exceeded the global maximum");
    }
    w = 0.0;
  }
  ir.w = w;
  const double sgn = (ir.psi_hat >= psi) ? 1.0 : -1.0;
  ir.r = sgn * std::sqrt(w);

  // Observed-information interest block at the global MLE.
  const Eigen::MatrixXd hess_hat = model.loglik(hat.theta, data).hess;
  const Eigen::MatrixXd cov = (-hess_hat).ldlt().solve(
      Eigen::MatrixXd::Identity(model.dim(), model.dim()));
  const double var_obs = cov(0, 0);
  if (!(var_obs > 0.0)) {
    throw NumericError("pivots: observed information is not positive definite");
  }
  const double eta_hat = eta_at(model, hat.theta);

  const ProfileDerivs at_psi = profile_derivatives(model, data, psi, opts);
  const ProfileDerivs at_hat = profile_derivatives(model, data, ir.psi_hat, opts);
  if (!(at_hat.jp > 0.0)) {
    throw NumericError("pivots: profile information at the maximum is not positive");
  }
  ir.j_p = at_hat.jp;

  ir.wald_obs = (ir.psi_hat - psi) / std::sqrt(var_obs);
  ir.wald_exp = (ir.psi_hat - psi) * std::sqrt(eta_hat);
  ir.score_obs = at_psi.m1 * std::sqrt(var_obs);
  ir.score_exp = at_psi.m1 / std::sqrt(eta_hat);

  const Eigen::VectorXd& plug =
      plugin == AdjustmentPlugin::tilde ? tilde.theta : hat.theta;
  const CumulantSet cs = model.cumulants(plug, 3);
  const AdjustmentReport rep = adjustment_report(cs, info_geometry(cs.lam2));
  ir.g_inf_plugin = rep.g_inf;
  ir.g_np_plugin = rep.g_np;
  ir.r_a = ir.r + rep.g_inf + rep.g_np;
  return ir;
}

}  // namespace sra
