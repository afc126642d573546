#include "oracle.hpp"

#include <cmath>

#include "sra/errors.hpp"
#include "sra/stats.hpp"

namespace oracle {

namespace {
constexpr double kPi = 3.141592653589793238462643383279503;
}

Surface surf_normal_regression(const Eigen::MatrixXd& X) {
  return [X](const Eigen::VectorXd& te, const Eigen::VectorXd& tt) {
    const int n = static_cast<int>(X.rows());
    const int q = static_cast<int>(X.cols());
    const double se = te(0), st = tt(0);
    const Eigen::VectorXd shift = X * (tt.tail(q) - te.tail(q));
    return -n * std::log(se) -
           (n * st * st + shift.squaredNorm()) / (2.0 * se * se);
  };
}

Surface surf_neyman_scott(int n, int q) {
  return [n, q](const Eigen::VectorXd& te, const Eigen::VectorXd& tt) {
    const double se = te(0), st = tt(0);
    double acc = -static_cast<double>(n) * q * std::log(se);
    for (int j = 0; j < q; ++j) {
      const double dm = tt(1 + j) - te(1 + j);
      acc -= n * (st * st + dm * dm) / (2.0 * se * se);
    }
    return acc;
  };
}

Surface surf_behrens_fisher(int n, int q) {
  return [n, q](const Eigen::VectorXd& te, const Eigen::VectorXd& tt) {
    double acc = 0.0;
    for (int j = 0; j < q; ++j) {
      const double se = te(1 + j), st = tt(1 + j);
      const double dm = tt(0) - te(0);
      acc += -n * std::log(se) - n * (st * st + dm * dm) / (2.0 * se * se);
    }
    return acc;
  };
}

Surface surf_exp_regression(const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
  return [z, w](const Eigen::VectorXd& te, const Eigen::VectorXd& tt) {
    const bool two = w.size() > 0;
    double acc = 0.0;
    for (int i = 0; i < z.size(); ++i) {
      const double le = std::log(te(1)) - te(0) * z(i) - (two ? te(2) * w(i) : 0.0);
      const double lt = std::log(tt(1)) - tt(0) * z(i) - (two ? tt(2) * w(i) : 0.0);
      acc += -le - std::exp(lt - le);
    }
    return acc;
  };
}

Surface surf_inverse_gaussian(int n, int q) {
  return [n, q](const Eigen::VectorXd& te, const Eigen::VectorXd& tt) {
    const double pe = te(0), pt = tt(0);
    double acc = 0.0;
    for (int j = 0; j < q; ++j) {
      const double fe = te(1 + j), ft = tt(1 + j);
      const double ey = std::sqrt(pt / ft);
      const double einv = std::sqrt(ft / pt) + 1.0 / pt;
      acc += n * (0.5 * std::log(pe) - 0.5 * (pe * einv + fe * ey) +
                  std::sqrt(pe * fe));
    }
    return acc;
  };
}

Surface surf_multi_exp(int n, int q, double t0) {
  auto rate1 = [q, t0](const Eigen::VectorXd& th) {
    double G = q * th(0);
    for (int a = 1; a < th.size(); ++a) G -= std::exp(-t0 * th(a));
    if (!(G > 0.0 && G < 1.0)) {
      throw sra::NumericError("oracle multi-exp: constraint not solvable");
    }
    return -std::log(G) / t0;
  };
  return [n, q, t0, rate1](const Eigen::VectorXd& te, const Eigen::VectorXd& tt) {
    Eigen::VectorXd re(q), rt(q);
    re(0) = rate1(te);
    rt(0) = rate1(tt);
    for (int a = 1; a < q; ++a) {
      re(a) = te(a);
      rt(a) = tt(a);
    }
    double acc = 0.0;
    for (int j = 0; j < q; ++j) {
      acc += n * (std::log(re(j)) - re(j) / rt(j));
    }
    return acc;
  };
}

Surface surf_curved_normal(int n, int q) {
  return [n, q](const Eigen::VectorXd& te, const Eigen::VectorXd& tt) {
    double acc = 0.0;
    for (int j = 0; j < q; ++j) {
      const double ve = te(0) * std::sqrt(te(1 + j));
      const double vt = tt(0) * std::sqrt(tt(1 + j));
      const double dm = tt(1 + j) - te(1 + j);
      acc += n * (-0.5 * std::log(ve) - (vt + dm * dm) / (2.0 * ve));
    }
    return acc;
  };
}

namespace {

double fd_mixed_h(const std::function<double(const Eigen::VectorXd&)>& f,
                  const Eigen::VectorXd& x, std::span<const int> idxs,
                  double h_rel) {
  if (idxs.empty()) return f(x);
  const int i = idxs[0];
  const auto rest = idxs.subspan(1);
  const double h0 = h_rel * std::max(1.0, std::abs(x(i)));
  auto central = [&](double h) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    return (fd_mixed_h(f, xp, rest, h_rel) - fd_mixed_h(f, xm, rest, h_rel)) /
           (2.0 * h);
  };
  const double d1 = central(h0);
  const double d2 = central(h0 / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

double fd_mixed(const std::function<double(const Eigen::VectorXd&)>& f,
                const Eigen::VectorXd& x, std::span<const int> idxs) {
  // Step balances Richardson truncation against roundoff amplified through
  // the idxs.size() nested divisions.
  const double h_rel =
      std::pow(2.22e-16, 1.0 / (4.0 + static_cast<double>(idxs.size())));
  return fd_mixed_h(f, x, idxs, h_rel);
}

sra::CumulantSet cumulants_from_surface(const Surface& m,
                                        const Eigen::VectorXd& theta,
                                        int depth) {
  const int d = static_cast<int>(theta.size());
  sra::CumulantSet cs = sra::make_cumulant_set(d, depth);

  auto eval_partial = [&](const Eigen::VectorXd& tt, std::span<const int> idxs) {
    auto f = [&](const Eigen::VectorXd& te) { return m(te, tt); };
    return fd_mixed(f, tt, idxs);
  };
  auto partial_at = [&](std::span<const int> idxs) {
    return eval_partial(theta, idxs);
  };
  // Total theta-derivative of a lambda entry: both arguments move together.
  auto total_fd = [&](const std::function<double(const Eigen::VectorXd&)>& lam,
                      int t) {
    const double h = 1e-3 * std::max(1.0, std::abs(theta(t)));
    Eigen::VectorXd tp = theta, tm = theta;
    tp(t) += h;
    tm(t) -= h;
    const double d1 = (lam(tp) - lam(tm)) / (2.0 * h);
    Eigen::VectorXd tp2 = theta, tm2 = theta;
    tp2(t) += h / 2.0;
    tm2(t) -= h / 2.0;
    const double d2 = (lam(tp2) - lam(tm2)) / h;
    return (4.0 * d2 - d1) / 3.0;
  };

  for (int r = 0; r < d; ++r) {
    for (int s = r; s < d; ++s) {
      const int ids[] = {r, s};
      const double v = partial_at(ids);
      cs.lam2.set_entry(std::array{r, s}, v);
      cs.lam2.set_entry(std::array{s, r}, v);
      cs.lam11.set_entry(std::array{r, s}, -v);
      cs.lam11.set_entry(std::array{s, r}, -v);
    }
  }
  for (int r = 0; r < d; ++r)
    for (int s = r; s < d; ++s)
      for (int t = s; t < d; ++t) {
        const int ids[] = {r, s, t};
        const double v = partial_at(ids);
        const int perm[6][3] = {{r, s, t}, {r, t, s}, {s, r, t},
                                {s, t, r}, {t, r, s}, {t, s, r}};
        for (auto& p : perm) cs.lam3.set_entry(std::array{p[0], p[1], p[2]}, v);
      }
  for (int r = 0; r < d; ++r)
    for (int s = r; s < d; ++s)
      for (int t = 0; t < d; ++t) {
        auto lam_rs = [&](const Eigen::VectorXd& tt) {
          const int ids[] = {r, s};
          return eval_partial(tt, ids);
        };
        const double v = total_fd(lam_rs, t);
        cs.dlam2.set_entry(std::array{r, s, t}, v);
        cs.dlam2.set_entry(std::array{s, r, t}, v);
        const double l21 = v - cs.lam3(r, s, t);
        cs.lam21.set_entry(std::array{r, s, t}, l21);
        cs.lam21.set_entry(std::array{s, r, t}, l21);
      }
  // Second Bartlett identity pins lam111.
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s)
      for (int t = 0; t < d; ++t) {
        const double v = -(cs.lam3(r, s, t) + cs.lam21(r, s, t) +
                           cs.lam21(r, t, s) + cs.lam21(s, t, r));
        cs.lam111.set_entry(std::array{r, s, t}, v);
      }

  if (depth >= 4) {
    for (int r = 0; r < d; ++r)
      for (int s = r; s < d; ++s)
        for (int t = s; t < d; ++t)
          for (int u = t; u < d; ++u) {
            const int ids[] = {r, s, t, u};
            const double v = partial_at(ids);
            int p[4] = {r, s, t, u};
            std::sort(p, p + 4);
            do {
              cs.lam4->set_entry(std::array{p[0], p[1], p[2], p[3]}, v);
            } while (std::next_permutation(p, p + 4));
          }
    for (int r = 0; r < d; ++r)
      for (int s = r; s < d; ++s)
        for (int t = s; t < d; ++t)
          for (int u = 0; u < d; ++u) {
            auto lam_rst = [&](const Eigen::VectorXd& tt) {
              const int ids[] = {r, s, t};
              return eval_partial(tt, ids);
            };
            const double v = total_fd(lam_rst, u);
            int p[3] = {r, s, t};
            std::sort(p, p + 3);
            do {
              cs.dlam3->set_entry(std::array{p[0], p[1], p[2], u}, v);
            } while (std::next_permutation(p, p + 3));
          }
    for (int r = 0; r < d; ++r)
      for (int s = r; s < d; ++s)
        for (int t = 0; t < d; ++t)
          for (int u = t; u < d; ++u) {
            auto dlam_rs_t = [&](const Eigen::VectorXd& tt) {
              // first total derivative at the shifted point
              const double h = 2e-3 * std::max(1.0, std::abs(tt(t)));
              Eigen::VectorXd tp = tt, tm = tt;
              tp(t) += h;
              tm(t) -= h;
              const int ids[] = {r, s};
              return (eval_partial(tp, ids) - eval_partial(tm, ids)) / (2.0 * h);
            };
            const double v = total_fd(dlam_rs_t, u);
            cs.ddlam2->set_entry(std::array{r, s, t, u}, v);
            cs.ddlam2->set_entry(std::array{s, r, t, u}, v);
            cs.ddlam2->set_entry(std::array{r, s, u, t}, v);
            cs.ddlam2->set_entry(std::array{s, r, u, t}, v);
          }
  }
  return cs;
}

double normal_scale_signed_root(double u, int n) {
  const double w = n * (u - 1.0 - std::log(u));
  return (u >= 1.0 ? 1.0 : -1.0) * std::sqrt(std::max(w, 0.0));
}

double normal_scale_r_cdf(double r, int n_total, int df) {
  // Invert r <-> u on the monotone branch, then evaluate the chi^2 CDF.
  const double target = r * r / static_cast<double>(n_total);
  auto fu = [&](double u) { return u - 1.0 - std::log(u); };
  double u;
  if (std::abs(r) < 1e-12) {
    u = 1.0;
  } else if (r > 0.0) {
    double lo = 1.0, hi = 2.0;
    while (fu(hi) < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fu(mid) < target ? lo : hi) = mid;
    }
    u = 0.5 * (lo + hi);
  } else {
    double lo = 1e-14, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fu(mid) > target ? lo : hi) = mid;
    }
    u = 0.5 * (lo + hi);
  }
  return sra::stats::chi2_cdf(n_total * u, df);
}

double expected_sigma_hat(double sigma, int n_total, int df) {
  const double half = 0.5 * df;
  return sigma * std::sqrt(2.0 / n_total) *
         std::exp(std::lgamma(half + 0.5) - std::lgamma(half));
}

double inverse_gaussian_mean_quadrature(double psi, double phi) {
  // E(Y) over the stated density via Simpson on a generous bracket.
  auto dens = [&](double y) {
    return std::sqrt(psi / (2.0 * kPi)) * std::pow(y, -1.5) *
           std::exp(-0.5 * (psi / y + phi * y) + std::sqrt(psi * phi));
  };
  const double mu = std::sqrt(psi / phi);
  const double hi = mu + 60.0 * std::sqrt(mu * mu * mu / psi) + 50.0 / phi;
  const int steps = 400000;
  const double h = hi / steps;
  double acc = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double a = k * h + 1e-12, b = a + h, mid = 0.5 * (a + b);
    acc += (b - a) / 6.0 *
           (a * dens(a) + 4.0 * mid * dens(mid) + b * dens(b));
  }
  return acc;
}

namespace {

class NormalMeanTestModel final : public sra::Model {
 public:
  NormalMeanTestModel(int n, double psi0) : n_(n), theta0_(1) { theta0_(0) = psi0; }

  std::string name() const override { return "normal-mean-test"; }
  int dim() const override { return 1; }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return n_; }
  std::vector<sra::ParamScale> scales() const override {
    return {sra::ParamScale::free};
  }

  sra::Dataset sample(const Eigen::VectorXd& th, sra::RngStream& rng) const override {
    sra::Dataset d;
    d.y.resize(n_, 1);
    for (int i = 0; i < n_; ++i) d.y(i, 0) = th(0) + rng.normal();
    return d;
  }

  sra::LoglikEval loglik(const Eigen::VectorXd& th,
                         const sra::Dataset& data) const override {
    sra::LoglikEval ev;
    const Eigen::ArrayXd r = data.y.col(0).array() - th(0);
    ev.value = -0.5 * r.square().sum();
    ev.grad.resize(1);
    ev.grad(0) = r.sum();
    ev.hess.resize(1, 1);
    ev.hess(0, 0) = -n_;
    return ev;
  }

  sra::CumulantSet cumulants(const Eigen::VectorXd&, int depth) const override {
    sra::CumulantSet cs = sra::make_cumulant_set(1, depth);
    cs.lam2.set_entry(std::array{0, 0}, -static_cast<double>(n_));
    cs.lam11.set_entry(std::array{0, 0}, static_cast<double>(n_));
    return cs;
  }

  Eigen::VectorXd init_guess(const sra::Dataset& data) const override {
    Eigen::VectorXd th(1);
    th(0) = data.y.col(0).mean();
    return th;
  }

 private:
  int n_;
  Eigen::VectorXd theta0_;
};

}  // namespace

sra::ModelPtr make_normal_mean_test_model(int n, double psi0) {
  return std::make_shared<NormalMeanTestModel>(n, psi0);
}

}  // namespace oracle
