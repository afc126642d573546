#include "sra/models.hpp"

#include <cmath>
#include <utility>

#include "sra/errors.hpp"

namespace sra {

namespace {

void set2(SymTensor& t, int a, int b, double v) {
  const int idx[] = {a, b};
  t.add_sym(idx, v);
}
void set3(SymTensor& t, int a, int b, int c, double v) {
  const int idx[] = {a, b, c};
  t.add_sym(idx, v);
}
void set4(SymTensor& t, int a, int b, int c, int e, double v) {
  const int idx[] = {a, b, c, e};
  t.add_sym(idx, v);
}

// ---------------------------------------------------------------------------
// Normal linear regression: y = X beta + sigma eps, theta = (sigma, beta).
// ---------------------------------------------------------------------------

class NormalRegressionModel final : public Model {
 public:
  NormalRegressionModel(Eigen::MatrixXd X, double sigma0, Eigen::VectorXd beta0)
      : X_(std::move(X)), S_(X_.transpose() * X_), theta0_(X_.cols() + 1) {
    if (sigma0 <= 0.0) throw ConfigError("normal-regression: sigma must be > 0");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S_);
    if (lu.rank() < X_.cols()) {
      throw ConfigError("normal-regression: design matrix is rank-deficient");
    }
    theta0_(0) = sigma0;
    theta0_.tail(X_.cols()) = beta0;
  }

  std::string name() const override { return "normal-regression"; }
  int dim() const override { return static_cast<int>(X_.cols()) + 1; }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return static_cast<int>(X_.rows()); }
  std::vector<ParamScale> scales() const override {
    std::vector<ParamScale> s(static_cast<std::size_t>(dim()), ParamScale::free);
    s[0] = ParamScale::positive;
    return s;
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    const int n = static_cast<int>(X_.rows());
    Dataset d;
    d.y.resize(n, 1);
    const Eigen::VectorXd mean = X_ * th.tail(dim() - 1);
    for (int i = 0; i < n; ++i) d.y(i, 0) = mean(i) + th(0) * rng.normal();
    return d;
  }

  void validate_data(const Dataset& data) const override {
    Model::validate_data(data);
    if (data.y.rows() != X_.rows() || data.y.cols() != 1) {
      throw ConfigError("normal-regression: data must be n x 1");
    }
    const Eigen::VectorXd beta = solve_beta(data.y.col(0));
    const double rss = (data.y.col(0) - X_ * beta).squaredNorm();
    if (rss <= 1e-12 * static_cast<double>(X_.rows())) {
      throw ConfigError("normal-regression: degenerate data, zero residual variance");
    }
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    const int n = static_cast<int>(X_.rows());
    const int q = dim() - 1;
    const double sigma = th(0);
    const Eigen::VectorXd r = data.y.col(0) - X_ * th.tail(q);
    const double rss = r.squaredNorm();
    const double s2 = sigma * sigma;
    LoglikEval ev;
    ev.value = -n * std::log(sigma) - 0.5 * rss / s2;
    ev.grad.resize(dim());
    ev.grad(0) = -n / sigma + rss / (s2 * sigma);
    ev.grad.tail(q) = X_.transpose() * r / s2;
    ev.hess.setZero(dim(), dim());
    ev.hess(0, 0) = n / s2 - 3.0 * rss / (s2 * s2);
    const Eigen::VectorXd xr = X_.transpose() * r;
    for (int a = 0; a < q; ++a) {
      ev.hess(0, a + 1) = ev.hess(a + 1, 0) = -2.0 * xr(a) / (s2 * sigma);
    }
    ev.hess.bottomRightCorner(q, q) = -S_ / s2;
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd& th, int depth) const override {
    const double n = static_cast<double>(X_.rows());
    const int q = dim() - 1;
    const double sg = th(0);
    const double s2 = sg * sg, s3 = s2 * sg, s4 = s3 * sg;
    CumulantSet cs = make_cumulant_set(dim(), depth);
    set2(cs.lam2, 0, 0, -2.0 * n / s2);
    set2(cs.lam11, 0, 0, 2.0 * n / s2);
    set3(cs.lam3, 0, 0, 0, 10.0 * n / s3);
    set3(cs.lam21, 0, 0, 0, -6.0 * n / s3);
    set3(cs.lam111, 0, 0, 0, 8.0 * n / s3);
    set3(cs.dlam2, 0, 0, 0, 4.0 * n / s3);
    for (int a = 0; a < q; ++a) {
      for (int b = a; b < q; ++b) {
        const double s = S_(a, b);
        set2(cs.lam2, a + 1, b + 1, -s / s2);
        set2(cs.lam11, a + 1, b + 1, s / s2);
        set3(cs.lam3, 0, a + 1, b + 1, 2.0 * s / s3);
        set3(cs.lam111, 0, a + 1, b + 1, 2.0 * s / s3);
        set3(cs.dlam2, a + 1, b + 1, 0, 2.0 * s / s3);
      }
    }
    // lam21[(0,a)|b] = -2 S_ab / sigma^3 for every ordered (a,b)
    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q; ++b) {
        set3(cs.lam21, 0, a + 1, b + 1, -2.0 * S_(a, b) / s3);
      }
    }
    if (depth >= 4) {
      set4(*cs.lam4, 0, 0, 0, 0, -54.0 * n / s4);
      set4(*cs.dlam3, 0, 0, 0, 0, -30.0 * n / s4);
      set4(*cs.ddlam2, 0, 0, 0, 0, -12.0 * n / s4);
      for (int a = 0; a < q; ++a) {
        for (int b = a; b < q; ++b) {
          const double s = S_(a, b);
          set4(*cs.lam4, 0, 0, a + 1, b + 1, -6.0 * s / s4);
          set4(*cs.dlam3, 0, a + 1, b + 1, 0, -6.0 * s / s4);
          set4(*cs.ddlam2, a + 1, b + 1, 0, 0, -6.0 * s / s4);
        }
      }
    }
    return cs;
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    const Eigen::VectorXd beta = solve_beta(data.y.col(0));
    const double rss = (data.y.col(0) - X_ * beta).squaredNorm();
    Eigen::VectorXd th(dim());
    th(0) = std::sqrt(std::max(rss / static_cast<double>(X_.rows()), 1e-12));
    th.tail(dim() - 1) = beta;
    return th;
  }

  const Eigen::MatrixXd& design() const { return X_; }

 private:
  Eigen::VectorXd solve_beta(const Eigen::VectorXd& y) const {
    return S_.ldlt().solve(X_.transpose() * y);
  }

  Eigen::MatrixXd X_;
  Eigen::MatrixXd S_;
  Eigen::VectorXd theta0_;
};

// ---------------------------------------------------------------------------
// Neyman-Scott: Y_ij ~ N(mu_j, sigma^2), theta = (sigma, mu).
// ---------------------------------------------------------------------------

class NeymanScottModel final : public Model {
 public:
  NeymanScottModel(int n, int q, double sigma0, Eigen::VectorXd mu0)
      : n_(n), q_(q), theta0_(q + 1) {
    if (n < 1) throw ConfigError("neyman-scott: need n >= 1 per stratum");
    if (q < 1) throw ConfigError("neyman-scott: need q >= 1");
    if (sigma0 <= 0.0) throw ConfigError("neyman-scott: sigma must be > 0");
    theta0_(0) = sigma0;
    theta0_.tail(q) = mu0;
  }

  std::string name() const override { return "neyman-scott"; }
  int dim() const override { return q_ + 1; }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return n_ * q_; }
  std::vector<ParamScale> scales() const override {
    std::vector<ParamScale> s(static_cast<std::size_t>(dim()), ParamScale::free);
    s[0] = ParamScale::positive;
    return s;
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    Dataset d;
    d.y.resize(n_, q_);
    for (int j = 0; j < q_; ++j) {
      for (int i = 0; i < n_; ++i) d.y(i, j) = th(1 + j) + th(0) * rng.normal();
    }
    return d;
  }

  void validate_data(const Dataset& data) const override {
    Model::validate_data(data);
    if (data.y.rows() != n_ || data.y.cols() != q_) {
      throw ConfigError("neyman-scott: data must be n x q");
    }
    double ssw = 0.0;
    for (int j = 0; j < q_; ++j) {
      const double m = data.y.col(j).mean();
      ssw += (data.y.col(j).array() - m).square().sum();
    }
    if (ssw <= 1e-12 * total_obs()) {
      throw ConfigError("neyman-scott: degenerate data, zero within-stratum variance");
    }
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    const double sigma = th(0);
    const double s2 = sigma * sigma;
    LoglikEval ev;
    ev.grad.setZero(dim());
    ev.hess.setZero(dim(), dim());
    double rss = 0.0;
    for (int j = 0; j < q_; ++j) {
      const Eigen::ArrayXd r = data.y.col(j).array() - th(1 + j);
      const double sr = r.sum();
      rss += r.square().sum();
      ev.grad(1 + j) = sr / s2;
      ev.hess(0, 1 + j) = ev.hess(1 + j, 0) = -2.0 * sr / (s2 * sigma);
      ev.hess(1 + j, 1 + j) = -n_ / s2;
    }
    const double N = static_cast<double>(n_) * q_;
    ev.value = -N * std::log(sigma) - 0.5 * rss / s2;
    ev.grad(0) = -N / sigma + rss / (s2 * sigma);
    ev.hess(0, 0) = N / s2 - 3.0 * rss / (s2 * s2);
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd& th, int depth) const override {
    const double N = static_cast<double>(n_) * q_;
    const double nn = static_cast<double>(n_);
    const double sg = th(0);
    const double s2 = sg * sg, s3 = s2 * sg, s4 = s3 * sg;
    CumulantSet cs = make_cumulant_set(dim(), depth);
    set2(cs.lam2, 0, 0, -2.0 * N / s2);
    set2(cs.lam11, 0, 0, 2.0 * N / s2);
    set3(cs.lam3, 0, 0, 0, 10.0 * N / s3);
    set3(cs.lam21, 0, 0, 0, -6.0 * N / s3);
    set3(cs.lam111, 0, 0, 0, 8.0 * N / s3);
    set3(cs.dlam2, 0, 0, 0, 4.0 * N / s3);
    for (int j = 1; j <= q_; ++j) {
      set2(cs.lam2, j, j, -nn / s2);
      set2(cs.lam11, j, j, nn / s2);
      set3(cs.lam3, 0, j, j, 2.0 * nn / s3);
      set3(cs.lam21, 0, j, j, -2.0 * nn / s3);
      set3(cs.lam111, 0, j, j, 2.0 * nn / s3);
      set3(cs.dlam2, j, j, 0, 2.0 * nn / s3);
    }
    if (depth >= 4) {
      set4(*cs.lam4, 0, 0, 0, 0, -54.0 * N / s4);
      set4(*cs.dlam3, 0, 0, 0, 0, -30.0 * N / s4);
      set4(*cs.ddlam2, 0, 0, 0, 0, -12.0 * N / s4);
      for (int j = 1; j <= q_; ++j) {
        set4(*cs.lam4, 0, 0, j, j, -6.0 * nn / s4);
        set4(*cs.dlam3, 0, j, j, 0, -6.0 * nn / s4);
        set4(*cs.ddlam2, j, j, 0, 0, -6.0 * nn / s4);
      }
    }
    return cs;
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    Eigen::VectorXd th(dim());
    double ssw = 0.0;
    for (int j = 0; j < q_; ++j) {
      th(1 + j) = data.y.col(j).mean();
      ssw += (data.y.col(j).array() - th(1 + j)).square().sum();
    }
    th(0) = std::sqrt(std::max(ssw / total_obs(), 1e-12));
    return th;
  }

 private:
  int n_, q_;
  Eigen::VectorXd theta0_;
};

// ---------------------------------------------------------------------------
// Behrens-Fisher: Y_ij ~ N(mu, sigma_j^2), theta = (mu, sigma_1..sigma_q).
// ---------------------------------------------------------------------------

class BehrensFisherModel final : public Model {
 public:
  BehrensFisherModel(int n, int q, double mu0, Eigen::VectorXd sigmas0)
      : n_(n), q_(q), theta0_(q + 1) {
    if (n < 2) throw ConfigError("behrens-fisher: need n >= 2 per stratum");
    if (q < 1) throw ConfigError("behrens-fisher: need q >= 1");
    if ((sigmas0.array() <= 0.0).any()) {
      throw ConfigError("behrens-fisher: sigmas must be > 0");
    }
    theta0_(0) = mu0;
    theta0_.tail(q) = sigmas0;
  }

  std::string name() const override { return "behrens-fisher"; }
  int dim() const override { return q_ + 1; }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return n_ * q_; }
  std::vector<ParamScale> scales() const override {
    std::vector<ParamScale> s(static_cast<std::size_t>(dim()), ParamScale::positive);
    s[0] = ParamScale::free;
    return s;
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    Dataset d;
    d.y.resize(n_, q_);
    for (int j = 0; j < q_; ++j) {
      for (int i = 0; i < n_; ++i) d.y(i, j) = th(0) + th(1 + j) * rng.normal();
    }
    return d;
  }

  void validate_data(const Dataset& data) const override {
    Model::validate_data(data);
    if (data.y.rows() != n_ || data.y.cols() != q_) {
      throw ConfigError("behrens-fisher: data must be n x q");
    }
    for (int j = 0; j < q_; ++j) {
      const double m = data.y.col(j).mean();
      if ((data.y.col(j).array() - m).square().sum() <= 1e-12 * n_) {
        throw ConfigError("behrens-fisher: degenerate stratum " + std::to_string(j));
      }
    }
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    LoglikEval ev;
    ev.value = 0.0;
    ev.grad.setZero(dim());
    ev.hess.setZero(dim(), dim());
    for (int j = 0; j < q_; ++j) {
      const double sg = th(1 + j);
      const double s2 = sg * sg;
      const Eigen::ArrayXd r = data.y.col(j).array() - th(0);
      const double sr = r.sum(), rss = r.square().sum();
      ev.value += -n_ * std::log(sg) - 0.5 * rss / s2;
      ev.grad(0) += sr / s2;
      ev.grad(1 + j) = -n_ / sg + rss / (s2 * sg);
      ev.hess(0, 0) += -n_ / s2;
      ev.hess(0, 1 + j) = ev.hess(1 + j, 0) = -2.0 * sr / (s2 * sg);
      ev.hess(1 + j, 1 + j) = n_ / s2 - 3.0 * rss / (s2 * s2);
    }
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd& th, int depth) const override {
    const double nn = static_cast<double>(n_);
    CumulantSet cs = make_cumulant_set(dim(), depth);
    for (int j = 1; j <= q_; ++j) {
      const double sg = th(j);
      const double s2 = sg * sg, s3 = s2 * sg, s4 = s3 * sg;
      set2(cs.lam2, 0, 0, -nn / s2);
      set2(cs.lam11, 0, 0, nn / s2);
      set2(cs.lam2, j, j, -2.0 * nn / s2);
      set2(cs.lam11, j, j, 2.0 * nn / s2);
      set3(cs.lam3, 0, 0, j, 2.0 * nn / s3);
      set3(cs.lam3, j, j, j, 10.0 * nn / s3);
      set3(cs.lam21, 0, j, 0, -2.0 * nn / s3);
      set3(cs.lam21, j, j, j, -6.0 * nn / s3);
      set3(cs.lam111, 0, 0, j, 2.0 * nn / s3);
      set3(cs.lam111, j, j, j, 8.0 * nn / s3);
      set3(cs.dlam2, 0, 0, j, 2.0 * nn / s3);
      set3(cs.dlam2, j, j, j, 4.0 * nn / s3);
      if (depth >= 4) {
        set4(*cs.lam4, 0, 0, j, j, -6.0 * nn / s4);
        set4(*cs.lam4, j, j, j, j, -54.0 * nn / s4);
        set4(*cs.dlam3, 0, 0, j, j, -6.0 * nn / s4);
        set4(*cs.dlam3, j, j, j, j, -30.0 * nn / s4);
        set4(*cs.ddlam2, 0, 0, j, j, -6.0 * nn / s4);
        set4(*cs.ddlam2, j, j, j, j, -12.0 * nn / s4);
      }
    }
    return cs;
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    Eigen::VectorXd th(dim());
    th(0) = data.y.mean();
    for (int j = 0; j < q_; ++j) {
      const double v = (data.y.col(j).array() - th(0)).square().sum() / n_;
      th(1 + j) = std::sqrt(std::max(v, 1e-12));
    }
    return th;
  }

 private:
  int n_, q_;
  Eigen::VectorXd theta0_;
};

// ---------------------------------------------------------------------------
// Log-linear exponential regression in natural coordinates: E(Y_i) =
// exp(x_i' gamma). Base for exp-regression.
// ---------------------------------------------------------------------------

class ExpLoglinearModel final : public Model {
 public:
  ExpLoglinearModel(Eigen::MatrixXd X, Eigen::VectorXd gamma0)
      : X_(std::move(X)), theta0_(std::move(gamma0)) {}

  std::string name() const override { return "exp-loglinear"; }
  int dim() const override { return static_cast<int>(X_.cols()); }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return static_cast<int>(X_.rows()); }
  std::vector<ParamScale> scales() const override {
    return std::vector<ParamScale>(static_cast<std::size_t>(dim()), ParamScale::free);
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    Dataset d;
    const int n = total_obs();
    d.y.resize(n, 1);
    const Eigen::VectorXd lin = X_ * th;
    for (int i = 0; i < n; ++i) d.y(i, 0) = std::exp(lin(i)) * rng.exponential();
    return d;
  }

  void validate_data(const Dataset& data) const override {
    Model::validate_data(data);
    if (data.y.rows() != X_.rows() || data.y.cols() != 1) {
      throw ConfigError("exp-loglinear: data must be n x 1");
    }
    if ((data.y.array() <= 0.0).any()) {
      throw ConfigError("exp-loglinear: data must be positive");
    }
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    const int n = total_obs();
    const Eigen::VectorXd lin = X_ * th;
    LoglikEval ev;
    ev.value = 0.0;
    ev.grad.setZero(dim());
    ev.hess.setZero(dim(), dim());
    for (int i = 0; i < n; ++i) {
      const double u = data.y(i, 0) * std::exp(-lin(i));
      ev.value += -lin(i) - u;
      ev.grad += (u - 1.0) * X_.row(i).transpose();
      ev.hess -= u * X_.row(i).transpose() * X_.row(i);
    }
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd&, int depth) const override {
    const int d = dim();
    const int n = total_obs();
    CumulantSet cs = make_cumulant_set(d, depth);
    for (int i = 0; i < n; ++i) {
      const Eigen::RowVectorXd x = X_.row(i);
      for (int r = 0; r < d; ++r) {
        for (int s = r; s < d; ++s) {
          set2(cs.lam2, r, s, -x(r) * x(s));
          set2(cs.lam11, r, s, x(r) * x(s));
        }
      }
      for (int r = 0; r < d; ++r)
        for (int s = r; s < d; ++s)
          for (int t = s; t < d; ++t) {
            const double xxx = x(r) * x(s) * x(t);
            set3(cs.lam3, r, s, t, xxx);
            set3(cs.lam111, r, s, t, 2.0 * xxx);
          }
      // lam21[(r,s)|t] = -x_r x_s x_t for every ordered triple
      for (int r = 0; r < d; ++r)
        for (int s = r; s < d; ++s)
          for (int t = 0; t < d; ++t) {
            set3(cs.lam21, r, s, t, -x(r) * x(s) * x(t));
          }
      if (depth >= 4) {
        for (int r = 0; r < d; ++r)
          for (int s = r; s < d; ++s)
            for (int t = s; t < d; ++t)
              for (int u = t; u < d; ++u) {
                set4(*cs.lam4, r, s, t, u, -x(r) * x(s) * x(t) * x(u));
              }
      }
    }
    // dlam2, dlam3, ddlam2 vanish: the arrays are free of gamma.
    return cs;
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    // E(log Y) = x'gamma - euler_gamma.
    const Eigen::VectorXd ly =
        data.y.col(0).array().log().matrix() +
        Eigen::VectorXd::Constant(total_obs(), 0.57721566490153286);
    return (X_.transpose() * X_).ldlt().solve(X_.transpose() * ly);
  }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd theta0_;
};

// ---------------------------------------------------------------------------
// Inverse Gaussian strata, theta = (psi, phi_1..phi_q).
// ---------------------------------------------------------------------------

class InverseGaussianModel final : public Model {
 public:
  InverseGaussianModel(int n, int q, double psi0, Eigen::VectorXd phi0)
      : n_(n), q_(q), theta0_(q + 1) {
    if (n < 1 || q < 1) throw ConfigError("inverse-gaussian: need n, q >= 1");
    if (psi0 <= 0.0 || (phi0.array() <= 0.0).any()) {
      throw ConfigError("inverse-gaussian: parameters must be > 0");
    }
    theta0_(0) = psi0;
    theta0_.tail(q) = phi0;
  }

  std::string name() const override { return "inverse-gaussian"; }
  int dim() const override { return q_ + 1; }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return n_ * q_; }
  std::vector<ParamScale> scales() const override {
    return std::vector<ParamScale>(static_cast<std::size_t>(dim()),
                                   ParamScale::positive);
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    Dataset d;
    d.y.resize(n_, q_);
    for (int j = 0; j < q_; ++j) {
      const double mu = std::sqrt(th(0) / th(1 + j));
      for (int i = 0; i < n_; ++i) d.y(i, j) = rng.inverse_gaussian(mu, th(0));
    }
    return d;
  }

  void validate_data(const Dataset& data) const override {
    Model::validate_data(data);
    if (data.y.rows() != n_ || data.y.cols() != q_) {
      throw ConfigError("inverse-gaussian: data must be n x q");
    }
    if ((data.y.array() <= 0.0).any()) {
      throw ConfigError("inverse-gaussian: data must be positive");
    }
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    const double psi = th(0);
    LoglikEval ev;
    ev.value = 0.0;
    ev.grad.setZero(dim());
    ev.hess.setZero(dim(), dim());
    for (int j = 0; j < q_; ++j) {
      const double phi = th(1 + j);
      const double s1 = data.y.col(j).sum();
      const double s2 = data.y.col(j).array().inverse().sum();
      const double l3 = data.y.col(j).array().log().sum();
      const double root = std::sqrt(psi * phi);
      ev.value += 0.5 * n_ * std::log(psi / 6.283185307179586) - 1.5 * l3 -
                  0.5 * (psi * s2 + phi * s1) + n_ * root;
      ev.grad(0) += 0.5 * n_ / psi - 0.5 * s2 + 0.5 * n_ * std::sqrt(phi / psi);
      ev.grad(1 + j) = -0.5 * s1 + 0.5 * n_ * std::sqrt(psi / phi);
      ev.hess(0, 0) += -0.5 * n_ / (psi * psi) - 0.25 * n_ * std::sqrt(phi) * std::pow(psi, -1.5);
      ev.hess(0, 1 + j) = ev.hess(1 + j, 0) = 0.25 * n_ / root;
      ev.hess(1 + j, 1 + j) = -0.25 * n_ * std::sqrt(psi) * std::pow(phi, -1.5);
    }
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd& th, int depth) const override {
    const double nn = static_cast<double>(n_);
    const double psi = th(0);
    CumulantSet cs = make_cumulant_set(dim(), depth);
    for (int j = 1; j <= q_; ++j) {
      const double phi = th(j);
      const double rp = std::sqrt(phi), rs = std::sqrt(psi);
      // second order
      set2(cs.lam2, 0, 0, -nn * (0.5 / (psi * psi) + 0.25 * rp * std::pow(psi, -1.5)));
      set2(cs.lam11, 0, 0, nn * (0.5 / (psi * psi) + 0.25 * rp * std::pow(psi, -1.5)));
      set2(cs.lam2, 0, j, 0.25 * nn / (rs * rp));
      set2(cs.lam11, 0, j, -0.25 * nn / (rs * rp));
      set2(cs.lam2, j, j, -0.25 * nn * rs * std::pow(phi, -1.5));
      set2(cs.lam11, j, j, 0.25 * nn * rs * std::pow(phi, -1.5));
      // third order; second derivatives are deterministic so lam21 = 0 and
      // lam111 = -lam3 by the second Bartlett identity.
      const double l300 = nn * (1.0 / (psi * psi * psi) + 0.375 * rp * std::pow(psi, -2.5));
      const double l200 = -0.125 * nn * std::pow(psi, -1.5) / rp;
      const double l110 = -0.125 * nn * std::pow(phi, -1.5) / rs;
      const double l111 = 0.375 * nn * rs * std::pow(phi, -2.5);
      set3(cs.lam3, 0, 0, 0, l300);
      set3(cs.lam3, 0, 0, j, l200);
      set3(cs.lam3, 0, j, j, l110);
      set3(cs.lam3, j, j, j, l111);
      set3(cs.lam111, 0, 0, 0, -l300);
      set3(cs.lam111, 0, 0, j, -l200);
      set3(cs.lam111, 0, j, j, -l110);
      set3(cs.lam111, j, j, j, -l111);
      set3(cs.dlam2, 0, 0, 0, l300);
      set3(cs.dlam2, 0, 0, j, l200);
      set3(cs.dlam2, 0, j, 0, l200);
      set3(cs.dlam2, 0, j, j, l110);
      set3(cs.dlam2, j, j, 0, l110);
      set3(cs.dlam2, j, j, j, l111);
      if (depth >= 4) {
        const double m40 = nn * (-3.0 * std::pow(psi, -4.0) - 0.9375 * rp * std::pow(psi, -3.5));
        const double m31 = 0.1875 * nn * std::pow(psi, -2.5) / rp;
        const double m22 = 0.0625 * nn * std::pow(psi, -1.5) * std::pow(phi, -1.5);
        const double m13 = 0.1875 * nn * std::pow(phi, -2.5) / rs;
        const double m04 = -0.9375 * nn * rs * std::pow(phi, -3.5);
        set4(*cs.lam4, 0, 0, 0, 0, m40);
        set4(*cs.lam4, 0, 0, 0, j, m31);
        set4(*cs.lam4, 0, 0, j, j, m22);
        set4(*cs.lam4, 0, j, j, j, m13);
        set4(*cs.lam4, j, j, j, j, m04);
        // Deterministic third derivatives: dlam3 and ddlam2 equal lam4.
        set4(*cs.dlam3, 0, 0, 0, 0, m40);
        set4(*cs.dlam3, 0, 0, 0, j, m31);
        set4(*cs.dlam3, 0, 0, j, 0, m31);
        set4(*cs.dlam3, 0, 0, j, j, m22);
        set4(*cs.dlam3, 0, j, j, 0, m22);
        set4(*cs.dlam3, 0, j, j, j, m13);
        set4(*cs.dlam3, j, j, j, 0, m13);
        set4(*cs.dlam3, j, j, j, j, m04);
        set4(*cs.ddlam2, 0, 0, 0, 0, m40);
        set4(*cs.ddlam2, 0, 0, 0, j, m31);
        set4(*cs.ddlam2, 0, j, 0, 0, m31);
        set4(*cs.ddlam2, 0, 0, j, j, m22);
        set4(*cs.ddlam2, 0, j, 0, j, m22);
        set4(*cs.ddlam2, j, j, 0, 0, m22);
        set4(*cs.ddlam2, 0, j, j, j, m13);
        set4(*cs.ddlam2, j, j, 0, j, m13);
        set4(*cs.ddlam2, j, j, j, j, m04);
      }
    }
    return cs;
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    Eigen::VectorXd th(dim());
    double s2_total = 0.0, inv_means = 0.0;
    Eigen::VectorXd ybar(q_);
    for (int j = 0; j < q_; ++j) {
      ybar(j) = data.y.col(j).mean();
      s2_total += data.y.col(j).array().inverse().sum();
      inv_means += 1.0 / ybar(j);
    }
    const double denom = s2_total - n_ * inv_means;
    th(0) = denom > 1e-12 ? n_ * q_ / denom : 1.0;
    for (int j = 0; j < q_; ++j) th(1 + j) = th(0) / (ybar(j) * ybar(j));
    return th;
  }

 private:
  int n_, q_;
  Eigen::VectorXd theta0_;
};

// ---------------------------------------------------------------------------
// Exponential strata in natural rates, base for multi-exp.
// ---------------------------------------------------------------------------

class ExpRatesModel final : public Model {
 public:
  ExpRatesModel(int n, Eigen::VectorXd rates0)
      : n_(n), theta0_(std::move(rates0)) {
    if (n < 1) throw ConfigError("exp-rates: need n >= 1");
    if ((theta0_.array() <= 0.0).any()) {
      throw ConfigError("exp-rates: rates must be > 0");
    }
  }

  std::string name() const override { return "exp-rates"; }
  int dim() const override { return static_cast<int>(theta0_.size()); }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return n_ * dim(); }
  std::vector<ParamScale> scales() const override {
    return std::vector<ParamScale>(static_cast<std::size_t>(dim()),
                                   ParamScale::positive);
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    Dataset d;
    const int q = dim();
    d.y.resize(n_, q);
    for (int j = 0; j < q; ++j) {
      for (int i = 0; i < n_; ++i) d.y(i, j) = rng.exponential() / th(j);
    }
    return d;
  }

  void validate_data(const Dataset& data) const override {
    Model::validate_data(data);
    if (data.y.rows() != n_ || data.y.cols() != dim()) {
      throw ConfigError("exp-rates: data must be n x q");
    }
    if ((data.y.array() <= 0.0).any()) {
      throw ConfigError("exp-rates: data must be positive");
    }
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    const int q = dim();
    LoglikEval ev;
    ev.value = 0.0;
    ev.grad.setZero(q);
    ev.hess.setZero(q, q);
    for (int j = 0; j < q; ++j) {
      const double t = data.y.col(j).sum();
      ev.value += n_ * std::log(th(j)) - th(j) * t;
      ev.grad(j) = n_ / th(j) - t;
      ev.hess(j, j) = -n_ / (th(j) * th(j));
    }
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd& th, int depth) const override {
    const int q = dim();
    const double nn = static_cast<double>(n_);
    CumulantSet cs = make_cumulant_set(q, depth);
    for (int j = 0; j < q; ++j) {
      const double p = th(j);
      const double p2 = p * p, p3 = p2 * p, p4 = p3 * p;
      set2(cs.lam2, j, j, -nn / p2);
      set2(cs.lam11, j, j, nn / p2);
      set3(cs.lam3, j, j, j, 2.0 * nn / p3);
      set3(cs.lam111, j, j, j, -2.0 * nn / p3);
      set3(cs.dlam2, j, j, j, 2.0 * nn / p3);
      if (depth >= 4) {
        set4(*cs.lam4, j, j, j, j, -6.0 * nn / p4);
        set4(*cs.dlam3, j, j, j, j, -6.0 * nn / p4);
        set4(*cs.ddlam2, j, j, j, j, -6.0 * nn / p4);
      }
    }
    return cs;
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    Eigen::VectorXd th(dim());
    for (int j = 0; j < dim(); ++j) {
      th(j) = 1.0 / std::max(data.y.col(j).mean(), 1e-12);
    }
    return th;
  }

 private:
  int n_;
  Eigen::VectorXd theta0_;
};

// ---------------------------------------------------------------------------
// Normal strata parameterized by (mean, variance) pairs, base for
// curved-normal. Coordinates interleaved: (m_1, v_1, m_2, v_2, ...).
// ---------------------------------------------------------------------------

class NormalMeanVarModel final : public Model {
 public:
  NormalMeanVarModel(int n, Eigen::VectorXd mv0) : n_(n), theta0_(std::move(mv0)) {
    if (n < 1) throw ConfigError("normal-meanvar: need n >= 1");
    if (theta0_.size() % 2 != 0) {
      throw ConfigError("normal-meanvar: theta must interleave (m, v) pairs");
    }
  }

  std::string name() const override { return "normal-meanvar"; }
  int dim() const override { return static_cast<int>(theta0_.size()); }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int q() const { return dim() / 2; }
  int total_obs() const override { return n_ * q(); }
  std::vector<ParamScale> scales() const override {
    std::vector<ParamScale> s(static_cast<std::size_t>(dim()), ParamScale::free);
    for (int j = 0; j < q(); ++j) s[static_cast<std::size_t>(2 * j + 1)] = ParamScale::positive;
    return s;
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    Dataset d;
    d.y.resize(n_, q());
    for (int j = 0; j < q(); ++j) {
      const double m = th(2 * j), sd = std::sqrt(th(2 * j + 1));
      for (int i = 0; i < n_; ++i) d.y(i, j) = m + sd * rng.normal();
    }
    return d;
  }

  void validate_data(const Dataset& data) const override {
    Model::validate_data(data);
    if (data.y.rows() != n_ || data.y.cols() != q()) {
      throw ConfigError("normal-meanvar: data must be n x q");
    }
    for (int j = 0; j < q(); ++j) {
      const double m = data.y.col(j).mean();
      if ((data.y.col(j).array() - m).square().sum() <= 1e-12 * n_) {
        throw ConfigError("normal-meanvar: degenerate stratum " + std::to_string(j));
      }
    }
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    LoglikEval ev;
    ev.value = 0.0;
    ev.grad.setZero(dim());
    ev.hess.setZero(dim(), dim());
    for (int j = 0; j < q(); ++j) {
      const double m = th(2 * j), v = th(2 * j + 1);
      const Eigen::ArrayXd r = data.y.col(j).array() - m;
      const double sr = r.sum(), rss = r.square().sum();
      ev.value += -0.5 * n_ * std::log(6.283185307179586 * v) - 0.5 * rss / v;
      ev.grad(2 * j) = sr / v;
      ev.grad(2 * j + 1) = -0.5 * n_ / v + 0.5 * rss / (v * v);
      ev.hess(2 * j, 2 * j) = -n_ / v;
      ev.hess(2 * j, 2 * j + 1) = ev.hess(2 * j + 1, 2 * j) = -sr / (v * v);
      ev.hess(2 * j + 1, 2 * j + 1) = 0.5 * n_ / (v * v) - rss / (v * v * v);
    }
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd& th, int depth) const override {
    const double nn = static_cast<double>(n_);
    CumulantSet cs = make_cumulant_set(dim(), depth);
    for (int j = 0; j < q(); ++j) {
      const int M = 2 * j, V = 2 * j + 1;
      const double v = th(V);
      const double v2 = v * v, v3 = v2 * v, v4 = v3 * v;
      set2(cs.lam2, M, M, -nn / v);
      set2(cs.lam11, M, M, nn / v);
      set2(cs.lam2, V, V, -0.5 * nn / v2);
      set2(cs.lam11, V, V, 0.5 * nn / v2);
      set3(cs.lam3, M, M, V, nn / v2);
      set3(cs.lam3, V, V, V, 2.0 * nn / v3);
      set3(cs.lam21, M, V, M, -nn / v2);
      set3(cs.lam21, V, V, V, -nn / v3);
      set3(cs.lam111, M, M, V, nn / v2);
      set3(cs.lam111, V, V, V, nn / v3);
      set3(cs.dlam2, M, M, V, nn / v2);
      set3(cs.dlam2, V, V, V, nn / v3);
      if (depth >= 4) {
        set4(*cs.lam4, M, M, V, V, -2.0 * nn / v3);
        set4(*cs.lam4, V, V, V, V, -9.0 * nn / v4);
        set4(*cs.dlam3, M, M, V, V, -2.0 * nn / v3);
        set4(*cs.dlam3, V, V, V, V, -6.0 * nn / v4);
        set4(*cs.ddlam2, M, M, V, V, -2.0 * nn / v3);
        set4(*cs.ddlam2, V, V, V, V, -3.0 * nn / v4);
      }
    }
    return cs;
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    Eigen::VectorXd th(dim());
    for (int j = 0; j < q(); ++j) {
      th(2 * j) = data.y.col(j).mean();
      const double v = (data.y.col(j).array() - th(2 * j)).square().sum() / n_;
      th(2 * j + 1) = std::max(v, 1e-12);
    }
    return th;
  }

 private:
  int n_;
  Eigen::VectorXd theta0_;
};

// ---------------------------------------------------------------------------
// Reparameterized model wrapper.
// ---------------------------------------------------------------------------

class ReparamModel final : public Model {
 public:
  ReparamModel(ModelPtr base, ParamMap map,
               std::function<Eigen::VectorXd(const Eigen::VectorXd&)> inverse,
               std::vector<ParamScale> scales, std::string name,
               Eigen::VectorXd theta0)
      : base_(std::move(base)),
        map_(std::move(map)),
        inverse_(std::move(inverse)),
        scales_(std::move(scales)),
        name_(std::move(name)),
        theta0_(std::move(theta0)) {}

  std::string name() const override { return name_; }
  int dim() const override { return map_.dim_in(); }
  const Eigen::VectorXd& theta0() const override { return theta0_; }
  int total_obs() const override { return base_->total_obs(); }
  std::vector<ParamScale> scales() const override { return scales_; }

  bool in_domain(const Eigen::VectorXd& th) const override {
    if (!Model::in_domain(th)) return false;
    try {
      return base_->in_domain(map_.value(th));
    } catch (const std::exception&) {
      return false;
    }
  }

  Dataset sample(const Eigen::VectorXd& th, RngStream& rng) const override {
    return base_->sample(map_.value(th), rng);
  }

  void validate_data(const Dataset& data) const override {
    base_->validate_data(data);
  }

  LoglikEval loglik(const Eigen::VectorXd& th, const Dataset& data) const override {
    const MapDerivs md = map_.derivs(th, 2);
    Eigen::VectorXd gamma(base_->dim());
    for (int i = 0; i < base_->dim(); ++i) gamma(i) = md.comps[static_cast<std::size_t>(i)].value;
    const LoglikEval be = base_->loglik(gamma, data);
    LoglikEval ev;
    ev.value = be.value;
    chain_grad_hess(md, be.grad, be.hess, &ev.grad, &ev.hess);
    return ev;
  }

  CumulantSet cumulants(const Eigen::VectorXd& th, int depth) const override {
    const int order = depth >= 4 ? 4 : 2;
    const MapDerivs md = map_.derivs(th, order);
    Eigen::VectorXd gamma(base_->dim());
    for (int i = 0; i < base_->dim(); ++i) gamma(i) = md.comps[static_cast<std::size_t>(i)].value;
    return reparam_cumulants(base_->cumulants(gamma, depth), md, depth);
  }

  Eigen::VectorXd init_guess(const Dataset& data) const override {
    return inverse_(base_->init_guess(data));
  }

 private:
  ModelPtr base_;
  ParamMap map_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> inverse_;
  std::vector<ParamScale> scales_;
  std::string name_;
  Eigen::VectorXd theta0_;
};

double solve_quartic_w(double psi, double u) {
  // Unique positive root of 2 w^4 + psi w - u = 0 for psi, u > 0.
  auto g = [&](double w) { return 2.0 * w * w * w * w + psi * w - u; };
  double hi = std::max(std::pow(u / 2.0, 0.25), u / psi) + 1.0;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  double w = 0.5 * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    const double dg = 8.0 * w * w * w + psi;
    w -= g(w) / dg;
  }
  return w;
}

}  // namespace

ModelPtr make_normal_regression(Eigen::MatrixXd X, double sigma0,
                                Eigen::VectorXd beta0) {
  return std::make_shared<NormalRegressionModel>(std::move(X), sigma0,
                                                 std::move(beta0));
}

ModelPtr make_neyman_scott(int n, int q, double sigma0, Eigen::VectorXd mu0) {
  return std::make_shared<NeymanScottModel>(n, q, sigma0, std::move(mu0));
}

ModelPtr make_behrens_fisher(int n, int q, double mu0, Eigen::VectorXd sigmas0) {
  return std::make_shared<BehrensFisherModel>(n, q, mu0, std::move(sigmas0));
}

ModelPtr reparameterize(ModelPtr base, ParamMap map,
                        std::function<Eigen::VectorXd(const Eigen::VectorXd&)>
                            inverse,
                        std::vector<ParamScale> scales, std::string name,
                        Eigen::VectorXd theta0) {
  return std::make_shared<ReparamModel>(std::move(base), std::move(map),
                                        std::move(inverse), std::move(scales),
                                        std::move(name), std::move(theta0));
}

ModelPtr make_exp_regression(Eigen::VectorXd z, Eigen::VectorXd w, double psi0,
                             double phi10, double phi20) {
  const int n = static_cast<int>(z.size());
  const bool two_cov = w.size() > 0;
  const double ztol = 1e-10 * std::max(1.0, z.cwiseAbs().maxCoeff());
  if (std::abs(z.sum()) > ztol * n) {
    throw ConfigError("exp-regression: covariate z must be centered (sum z = 0)");
  }
  if (two_cov) {
    if (w.size() != n) throw ConfigError("exp-regression: z and w lengths differ");
    const double wtol = 1e-10 * std::max(1.0, w.cwiseAbs().maxCoeff());
    if (std::abs(w.sum()) > wtol * n) {
      throw ConfigError("exp-regression: covariate w must be centered (sum w = 0)");
    }
  }
  if (phi10 <= 0.0) throw ConfigError("exp-regression: phi1 must be > 0");

  const int p = two_cov ? 3 : 2;
  Eigen::MatrixXd X(n, p);
  X.col(0) = -z;
  X.col(1).setOnes();
  if (two_cov) X.col(2) = -w;
  Eigen::VectorXd gamma0(p);
  gamma0(0) = psi0;
  gamma0(1) = std::log(phi10);
  if (two_cov) gamma0(2) = phi20;
  ModelPtr base = std::make_shared<ExpLoglinearModel>(std::move(X), gamma0);

  std::vector<MapComponent> comps;
  comps.push_back(MapComponent::coordinate(0));
  comps.push_back(MapComponent::jet({1}, [](std::span<const Jet> a) {
    return log(a[0]);
  }));
  if (two_cov) comps.push_back(MapComponent::coordinate(2));

  auto inverse = [two_cov](const Eigen::VectorXd& g) {
    Eigen::VectorXd th(g.size());
    th(0) = g(0);
    th(1) = std::exp(g(1));
    if (two_cov) th(2) = g(2);
    return th;
  };
  std::vector<ParamScale> scales(static_cast<std::size_t>(p), ParamScale::free);
  scales[1] = ParamScale::positive;
  Eigen::VectorXd theta0(p);
  theta0(0) = psi0;
  theta0(1) = phi10;
  if (two_cov) theta0(2) = phi20;
  return reparameterize(std::move(base), ParamMap(p, std::move(comps)), inverse,
                        std::move(scales), "exp-regression", std::move(theta0));
}

ModelPtr make_inverse_gaussian(int n, int q, double psi0, Eigen::VectorXd phi0) {
  return std::make_shared<InverseGaussianModel>(n, q, psi0, std::move(phi0));
}

ModelPtr make_multi_exp(int n, int q, double t0, Eigen::VectorXd rates0) {
  if (q < 2) throw ConfigError("multi-exp: need q >= 2");
  if (t0 <= 0.0) throw ConfigError("multi-exp: need t0 > 0");
  if ((rates0.array() <= 0.0).any()) {
    throw ConfigError("multi-exp: rates must be > 0");
  }
  ModelPtr base = std::make_shared<ExpRatesModel>(n, rates0);

  const int d = q;  // theta = (psi, phi_2..phi_q)
  // phi_1(theta) = -log(G)/t0 with G = q psi - sum_{a>=2} exp(-t0 phi_a).
  auto phi1_comp = MapComponent::custom([q, t0, d](const Eigen::VectorXd& th,
                                                   int order) {
    CompDerivs cd;
    cd.support.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) cd.support[static_cast<std::size_t>(i)] = i;
    if (order >= 3 && d > 16) {
      throw NumericError("multi-exp: order-" + std::to_string(order) +
                         " map derivatives unsupported for q > 16");
    }
    std::vector<double> e(static_cast<std::size_t>(d), 0.0);
    double G = static_cast<double>(q) * th(0);
    for (int a = 1; a < d; ++a) {
      e[static_cast<std::size_t>(a)] = std::exp(-t0 * th(a));
      G -= e[static_cast<std::size_t>(a)];
    }
    if (!(G > 0.0) || !(G < 1.0)) {
      throw NumericError("multi-exp: psi constraint has no positive rate root");
    }
    // Partials of G: G_0 = q, G_a..a = (-1)^{k+1} t0^k E_a, mixed terms vanish.
    auto dG = [&](std::span<const int> ids) -> double {
      if (ids.size() == 1 && ids[0] == 0) return static_cast<double>(q);
      const int a = ids[0];
      if (a == 0) return 0.0;
      for (int v : ids) {
        if (v != a) return 0.0;
      }
      const double sign = (ids.size() % 2 == 0) ? -1.0 : 1.0;
      return sign * std::pow(t0, static_cast<double>(ids.size())) *
             e[static_cast<std::size_t>(a)];
    };

    cd.value = -std::log(G) / t0;
    const std::size_t dz = static_cast<std::size_t>(d);
    cd.d1.assign(dz, 0.0);
    cd.d2.assign(dz * dz, 0.0);
    if (order >= 3) cd.d3.assign(dz * dz * dz, 0.0);
    if (order >= 4) cd.d4.assign(dz * dz * dz * dz, 0.0);
    const double iG = 1.0 / G;
    auto g1 = [&](int r) { const int ids[] = {r}; return dG(ids); };
    auto g2 = [&](int r, int s) { const int ids[] = {r, s}; return dG(ids); };
    auto g3 = [&](int r, int s, int t) { const int ids[] = {r, s, t}; return dG(ids); };
    auto g4 = [&](int r, int s, int t, int u) { const int ids[] = {r, s, t, u}; return dG(ids); };

    for (int r = 0; r < d; ++r) cd.d1[static_cast<std::size_t>(r)] = -(g1(r) * iG) / t0;
    for (int r = 0; r < d; ++r) {
      for (int s = 0; s < d; ++s) {
        const double v = g2(r, s) * iG - g1(r) * g1(s) * iG * iG;
        cd.d2[static_cast<std::size_t>(r) * dz + s] = -v / t0;
      }
    }
    if (order >= 3) {
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s)
          for (int t = 0; t < d; ++t) {
            const double v =
                g3(r, s, t) * iG -
                (g2(r, s) * g1(t) + g2(r, t) * g1(s) + g2(s, t) * g1(r)) * iG * iG +
                2.0 * g1(r) * g1(s) * g1(t) * iG * iG * iG;
            cd.d3[(static_cast<std::size_t>(r) * dz + s) * dz + t] = -v / t0;
          }
    }
    if (order >= 4) {
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s)
          for (int t = 0; t < d; ++t)
            for (int u = 0; u < d; ++u) {
              const double v =
                  g4(r, s, t, u) * iG -
                  (g3(r, s, t) * g1(u) + g3(r, s, u) * g1(t) +
                   g3(r, t, u) * g1(s) + g3(s, t, u) * g1(r) +
                   g2(r, s) * g2(t, u) + g2(r, t) * g2(s, u) +
                   g2(r, u) * g2(s, t)) * iG * iG +
                  2.0 * (g2(r, s) * g1(t) * g1(u) + g2(r, t) * g1(s) * g1(u) +
                         g2(r, u) * g1(s) * g1(t) + g2(s, t) * g1(r) * g1(u) +
                         g2(s, u) * g1(r) * g1(t) + g2(t, u) * g1(r) * g1(s)) *
                      iG * iG * iG -
                  6.0 * g1(r) * g1(s) * g1(t) * g1(u) * iG * iG * iG * iG;
              cd.d4[((static_cast<std::size_t>(r) * dz + s) * dz + t) * dz + u] =
                  -v / t0;
            }
    }
    return cd;
  });

  std::vector<MapComponent> comps;
  comps.push_back(std::move(phi1_comp));
  for (int a = 1; a < d; ++a) comps.push_back(MapComponent::coordinate(a));

  auto inverse = [q, t0](const Eigen::VectorXd& rates) {
    Eigen::VectorXd th(rates.size());
    double psi = 0.0;
    for (int j = 0; j < rates.size(); ++j) psi += std::exp(-t0 * rates(j));
    th(0) = psi / q;
    th.tail(rates.size() - 1) = rates.tail(rates.size() - 1);
    return th;
  };

  Eigen::VectorXd theta0 = inverse(rates0);
  std::vector<ParamScale> scales(static_cast<std::size_t>(d), ParamScale::positive);
  return reparameterize(std::move(base), ParamMap(d, std::move(comps)), inverse,
                        std::move(scales), "multi-exp", std::move(theta0));
}

ModelPtr make_curved_normal(int n, int q, double psi0, Eigen::VectorXd mu0) {
  if ((mu0.array() <= 0.0).any() || psi0 <= 0.0) {
    throw ConfigError("curved-normal: parameters must be > 0");
  }
  Eigen::VectorXd mv0(2 * q);
  for (int j = 0; j < q; ++j) {
    mv0(2 * j) = mu0(j);
    mv0(2 * j + 1) = psi0 * std::sqrt(mu0(j));
  }
  ModelPtr base = std::make_shared<NormalMeanVarModel>(n, mv0);

  std::vector<MapComponent> comps;
  for (int j = 0; j < q; ++j) {
    comps.push_back(MapComponent::coordinate(1 + j));
    comps.push_back(MapComponent::jet({0, 1 + j}, [](std::span<const Jet> a) {
      return a[0] * sqrt(a[1]);
    }));
  }
  const int qq = q;
  auto inverse = [qq](const Eigen::VectorXd& mv) {
    Eigen::VectorXd th(qq + 1);
    double psi = 0.0;
    for (int j = 0; j < qq; ++j) {
      th(1 + j) = mv(2 * j);
      psi += mv(2 * j + 1) / std::sqrt(std::max(mv(2 * j), 1e-12));
    }
    th(0) = psi / qq;
    return th;
  };
  Eigen::VectorXd theta0(q + 1);
  theta0(0) = psi0;
  theta0.tail(q) = mu0;
  std::vector<ParamScale> scales(static_cast<std::size_t>(q + 1),
                                 ParamScale::positive);
  return reparameterize(std::move(base), ParamMap(q + 1, std::move(comps)),
                        inverse, std::move(scales), "curved-normal",
                        std::move(theta0));
}

ModelPtr make_inverse_gaussian_orthogonal(int n, int q, double psi0,
                                          Eigen::VectorXd mu0) {
  if ((mu0.array() <= 0.0).any() || psi0 <= 0.0) {
    throw ConfigError("inverse-gaussian-orthogonal: parameters must be > 0");
  }
  Eigen::VectorXd phi0(q);
  for (int j = 0; j < q; ++j) phi0(j) = psi0 / (mu0(j) * mu0(j));
  ModelPtr base = std::make_shared<InverseGaussianModel>(n, q, psi0, phi0);

  std::vector<MapComponent> comps;
  comps.push_back(MapComponent::coordinate(0));
  for (int j = 0; j < q; ++j) {
    comps.push_back(MapComponent::jet({0, 1 + j}, [](std::span<const Jet> a) {
      return a[0] / (a[1] * a[1]);
    }));
  }
  auto inverse = [q](const Eigen::VectorXd& th) {
    Eigen::VectorXd out(q + 1);
    out(0) = th(0);
    for (int j = 0; j < q; ++j) out(1 + j) = std::sqrt(th(0) / th(1 + j));
    return out;
  };
  Eigen::VectorXd theta0(q + 1);
  theta0(0) = psi0;
  theta0.tail(q) = mu0;
  std::vector<ParamScale> scales(static_cast<std::size_t>(q + 1),
                                 ParamScale::positive);
  return reparameterize(std::move(base), ParamMap(q + 1, std::move(comps)),
                        inverse, std::move(scales), "inverse-gaussian-orthogonal",
                        std::move(theta0));
}

ModelPtr make_curved_normal_orthogonal(int n, int q, double psi0,
                                       Eigen::VectorXd u0) {
  if ((u0.array() <= 0.0).any() || psi0 <= 0.0) {
    throw ConfigError("curved-normal-orthogonal: parameters must be > 0");
  }
  Eigen::VectorXd mv0(2 * q);
  for (int j = 0; j < q; ++j) {
    const double w = solve_quartic_w(psi0, u0(j));
    mv0(2 * j) = w * w;
    mv0(2 * j + 1) = psi0 * w;
  }
  ModelPtr base = std::make_shared<NormalMeanVarModel>(n, mv0);

  // Nuisance u = psi sqrt(mu) + 2 mu^2 makes (psi, u) orthogonal; recover
  // w = sqrt(mu) from 2 w^4 + psi w - u = 0 and map back to (m, v).
  auto wjet = [](std::span<const Jet> a) {
    const double w0 = solve_quartic_w(a[0].value(), a[1].value());
    return implicit_root(
        [](const Jet& w, std::span<const Jet> args) {
          return 2.0 * (w * w) * (w * w) + args[0] * w - args[1];
        },
        a, w0);
  };
  std::vector<MapComponent> comps;
  for (int j = 0; j < q; ++j) {
    comps.push_back(MapComponent::jet({0, 1 + j}, [wjet](std::span<const Jet> a) {
      const Jet w = wjet(a);
      return w * w;
    }));
    comps.push_back(MapComponent::jet({0, 1 + j}, [wjet](std::span<const Jet> a) {
      const Jet w = wjet(a);
      return a[0] * w;
    }));
  }
  auto inverse = [q](const Eigen::VectorXd& mv) {
    Eigen::VectorXd th(q + 1);
    double psi = 0.0;
    for (int j = 0; j < q; ++j) psi += mv(2 * j + 1) / std::sqrt(mv(2 * j));
    psi /= q;
    th(0) = psi;
    for (int j = 0; j < q; ++j) {
      const double m = mv(2 * j);
      th(1 + j) = psi * std::sqrt(m) + 2.0 * m * m;
    }
    return th;
  };
  Eigen::VectorXd theta0(q + 1);
  theta0(0) = psi0;
  theta0.tail(q) = u0;
  std::vector<ParamScale> scales(static_cast<std::size_t>(q + 1),
                                 ParamScale::positive);
  return reparameterize(std::move(base), ParamMap(q + 1, std::move(comps)),
                        inverse, std::move(scales), "curved-normal-orthogonal",
                        std::move(theta0));
}

}  // namespace sra
