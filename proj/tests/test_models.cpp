#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "sra/errors.hpp"
#include "sra/models.hpp"

using namespace sra;

namespace {

struct Case {
  ModelPtr model;
  oracle::Surface surface;
  std::string label;
};

std::vector<Case> all_cases() {
  std::vector<Case> cases;
  {
    Eigen::MatrixXd X(6, 2);
    X << 1, -1.0, 1, -0.6, 1, -0.2, 1, 0.2, 1, 0.6, 1, 1.0;
    Eigen::VectorXd beta(2);
    beta << 0.4, -0.7;
    cases.push_back({make_normal_regression(X, 1.3, beta),
                     oracle::surf_normal_regression(X), "normal-regression"});
  }
  {
    Eigen::VectorXd mu(3);
    mu << 0.5, -0.2, 1.1;
    cases.push_back({make_neyman_scott(5, 3, 0.8, mu),
                     oracle::surf_neyman_scott(5, 3), "neyman-scott"});
  }
  {
    Eigen::VectorXd sg(2);
    sg << 0.9, 1.7;
    cases.push_back({make_behrens_fisher(6, 2, 0.3, sg),
                     oracle::surf_behrens_fisher(6, 2), "behrens-fisher"});
  }
  {
    Eigen::VectorXd z(5), w(5);
    z << -2, -1, 0, 1, 2;
    w << 2, -1, -2, -1, 2;
    cases.push_back({make_exp_regression(z, w, 0.4, 1.5, -0.3),
                     oracle::surf_exp_regression(z, w), "exp-regression"});
  }
  {
    Eigen::VectorXd phi(2);
    phi << 0.7, 1.4;
    cases.push_back({make_inverse_gaussian(4, 2, 1.2, phi),
                     oracle::surf_inverse_gaussian(4, 2), "inverse-gaussian"});
  }
  {
    Eigen::VectorXd rates(3);
    rates << 1.0, 0.6, 1.8;
    cases.push_back({make_multi_exp(4, 3, 0.5, rates),
                     oracle::surf_multi_exp(4, 3, 0.5), "multi-exp"});
  }
  {
    Eigen::VectorXd mu(2);
    mu << 1.0, 2.5;
    cases.push_back({make_curved_normal(5, 2, 0.9, mu),
                     oracle::surf_curved_normal(5, 2), "curved-normal"});
  }
  return cases;
}

double max_abs(const SymTensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_diff(const SymTensor& a, const SymTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("gradient and Hessian agree with finite differences of the value") {
  for (const auto& c : all_cases()) {
    CAPTURE(c.label);
    RngStream rng(11);
    const Dataset data = c.model->sample(c.model->theta0(), rng);
    const Eigen::VectorXd th = c.model->theta0();
    const LoglikEval ev = c.model->loglik(th, data);
    const int d = c.model->dim();

    for (int i = 0; i < d; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(th(i)));
      Eigen::VectorXd tp = th, tm = th;
      tp(i) += h;
      tm(i) -= h;
      const double fd =
          (c.model->loglik(tp, data).value - c.model->loglik(tm, data).value) /
          (2.0 * h);
      CHECK(ev.grad(i) ==
            doctest::Approx(fd).epsilon(1e-6).scale(std::abs(fd) + 1.0));
      for (int j = 0; j < d; ++j) {
        const double fdh =
            (c.model->loglik(tp, data).grad(j) -
             c.model->loglik(tm, data).grad(j)) /
            (2.0 * h);
        CHECK(ev.hess(i, j) ==
              doctest::Approx(fdh).epsilon(5e-6).scale(std::abs(fdh) + 1.0));
        CHECK(ev.hess(i, j) == doctest::Approx(ev.hess(j, i)));
      }
    }
  }
}

TEST_CASE("analytic cumulants match the expected log-likelihood surface") {
  for (const auto& c : all_cases()) {
    CAPTURE(c.label);
    const Eigen::VectorXd th = c.model->theta0();
    const CumulantSet got = c.model->cumulants(th, 4);
    const CumulantSet ref = oracle::cumulants_from_surface(c.surface, th, 4);

    const double s2 = std::max(1.0, max_abs(ref.lam2));
    const double s3 = std::max(1.0, max_abs(ref.lam3));
    CHECK(max_diff(got.lam2, ref.lam2) < 1e-7 * s2);
    CHECK(max_diff(got.lam3, ref.lam3) < 1e-5 * s3);
    CHECK(max_diff(got.lam21, ref.lam21) < 2e-5 * s3);
    CHECK(max_diff(got.dlam2, ref.dlam2) < 2e-5 * s3);
    CHECK(max_diff(got.lam111, ref.lam111) < 6e-5 * s3);
    const double s4 = std::max(1.0, max_abs(*ref.lam4));
    CHECK(max_diff(*got.lam4, *ref.lam4) < 2e-4 * s4);
    CHECK(max_diff(*got.dlam3, *ref.dlam3) < 5e-4 * s4);
    CHECK(max_diff(*got.ddlam2, *ref.ddlam2) < 5e-4 * s4);
  }
}

TEST_CASE("structural identities hold for every analytic provider") {
  for (const auto& c : all_cases()) {
    CAPTURE(c.label);
    const CumulantSet cs = c.model->cumulants(c.model->theta0(), 3);
    const IdentityResiduals ir = identity_residuals(cs);
    CHECK(ir.first_bartlett < 1e-8 * ir.scale);
    CHECK(ir.second_bartlett < 1e-8 * ir.scale);
    CHECK(ir.dlam2_consistency < 1e-8 * ir.scale);

    // symmetry of every array under its declared groups
    CHECK(cs.lam2.max_symmetry_violation() < 1e-10 * ir.scale);
    CHECK(cs.lam3.max_symmetry_violation() < 1e-10 * ir.scale);
    CHECK(cs.lam21.max_symmetry_violation() < 1e-10 * ir.scale);
    CHECK(cs.lam111.max_symmetry_violation() < 1e-10 * ir.scale);
  }
}

TEST_CASE("arrays scale linearly in the sample size") {
  auto scale_check = [](const ModelPtr& m1, const ModelPtr& m2) {
    const CumulantSet a = m1->cumulants(m1->theta0(), 3);
    const CumulantSet b = m2->cumulants(m2->theta0(), 3);
    for (std::size_t i = 0; i < a.lam2.size(); ++i) {
      CHECK(b.lam2.data()[i] == doctest::Approx(2.0 * a.lam2.data()[i]));
    }
    for (std::size_t i = 0; i < a.lam3.size(); ++i) {
      CHECK(b.lam3.data()[i] == doctest::Approx(2.0 * a.lam3.data()[i]));
    }
  };
  Eigen::VectorXd mu(2);
  mu << 0.5, -0.2;
  scale_check(make_neyman_scott(5, 2, 1.2, mu), make_neyman_scott(10, 2, 1.2, mu));
  Eigen::VectorXd phi(2);
  phi << 0.7, 1.1;
  scale_check(make_inverse_gaussian(3, 2, 0.9, phi),
              make_inverse_gaussian(6, 2, 0.9, phi));
}

TEST_CASE("samplers: moments, determinism, and shape") {
  SUBCASE("neyman-scott mean within four standard errors") {
    Eigen::VectorXd mu(2);
    mu << 1.5, -0.5;
    const auto ns = make_neyman_scott(4, 2, 1.0, mu);
    const int B = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    for (int b = 0; b < B; ++b) {
      RngStream rng(substream_seed(77, static_cast<std::uint64_t>(b)));
      const Dataset d = ns->sample(ns->theta0(), rng);
      sum(0) += d.y.col(0).mean();
      sum(1) += d.y.col(1).mean();
    }
    const double se = 1.0 / std::sqrt(4.0 * B);
    CHECK(std::abs(sum(0) / B - 1.5) < 4.0 * se);
    CHECK(std::abs(sum(1) / B + 0.5) < 4.0 * se);
  }

  SUBCASE("inverse gaussian mean vs quadrature oracle") {
    Eigen::VectorXd phi(1);
    phi << 1.7;
    const auto ig = make_inverse_gaussian(1, 1, 0.8, phi);
    const double expect = oracle::inverse_gaussian_mean_quadrature(0.8, 1.7);
    const int B = 200000;
    double s = 0.0, s2 = 0.0;
    for (int b = 0; b < B; ++b) {
      RngStream rng(substream_seed(5, static_cast<std::uint64_t>(b)));
      const double y = ig->sample(ig->theta0(), rng).y(0, 0);
      s += y;
      s2 += y * y;
    }
    const double mean = s / B;
    const double sd = std::sqrt(s2 / B - mean * mean);
    CHECK(std::abs(mean - expect) < 4.0 * sd / std::sqrt(static_cast<double>(B)));
  }

  SUBCASE("fixed seed gives bit-identical datasets") {
    for (const auto& c : all_cases()) {
      RngStream r1(42), r2(42);
      const Dataset d1 = c.model->sample(c.model->theta0(), r1);
      const Dataset d2 = c.model->sample(c.model->theta0(), r2);
      CHECK(d1.y == d2.y);
    }
  }
}

TEST_CASE("registry spot checks and config validation") {
  CHECK_THROWS_AS(build_model("no-such-model", {}), ConfigError);
  CHECK_THROWS_AS(build_model("neyman-scott", {{"sigma", -1.0}}), ConfigError);
  CHECK_THROWS_AS(build_model("multi-exp", {{"q", 1}}), ConfigError);

  // centered-design requirement for exponential regression
  Eigen::VectorXd z(3), w;
  z << 1.0, 1.0, -1.0;
  CHECK_THROWS_AS(make_exp_regression(z, w, 0.1, 1.0, 0.0), ConfigError);

  const auto m = build_model("multi-exp", {{"n", 3}, {"q", 4}, {"t0", 0.5}});
  CHECK(m->dim() == 4);
  CHECK(m->theta0()(0) == doctest::Approx(std::exp(-0.5)));

  CHECK(registered_models().size() == 7);
}

TEST_CASE("example 5 interest parameter round-trips through the rate solve") {
  Eigen::VectorXd rates(3);
  rates << 0.9, 1.4, 0.5;
  const auto me = make_multi_exp(2, 3, 0.5, rates);
  const Eigen::VectorXd th = me->theta0();
  const double psi_expect =
      (std::exp(-0.45) + std::exp(-0.7) + std::exp(-0.25)) / 3.0;
  CHECK(th(0) == doctest::Approx(psi_expect).epsilon(1e-12));
  // Out-of-range interest (no positive rate root) is outside the domain.
  Eigen::VectorXd bad = th;
  bad(0) = 0.99;  // q psi - sum > 1 forces a negative rate
  CHECK_FALSE(me->in_domain(bad));
}

TEST_CASE("degenerate data is rejected before optimization") {
  const auto ns = make_neyman_scott(3, 2, 1.0, Eigen::VectorXd::Zero(2));
  Dataset flat;
  flat.y = Eigen::MatrixXd::Constant(3, 2, 1.0);
  CHECK_THROWS_AS(ns->validate_data(flat), ConfigError);

  Eigen::MatrixXd X(4, 1);
  X << 1, 1, 1, 1;
  const auto nr = make_normal_regression(X, 1.0, Eigen::VectorXd::Zero(1));
  Dataset same;
  same.y = Eigen::MatrixXd::Constant(4, 1, 2.0);
  CHECK_THROWS_AS(nr->validate_data(same), ConfigError);
}
