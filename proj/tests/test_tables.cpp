#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "sra/adjustments.hpp"
#include "sra/errors.hpp"
#include "sra/geometry.hpp"
#include "sra/models.hpp"
#include "sra/tables.hpp"

using namespace sra;

TEST_CASE("ratio table 1: multi-sample exponential") {
  const RatioTable t = ratio_table(1);
  REQUIRE(t.qs == std::vector<int>{2, 5, 10, 20, 50});
  const std::vector<double> expect_a = {2.25, 9.00, 20.25, 42.75, 110.25};
  const std::vector<double> expect_b = {-2.10, -5.50, -8.56, -15.76, -130.29};
  for (std::size_t i = 0; i < t.qs.size(); ++i) {
    CAPTURE(t.qs[i]);
    CHECK(std::abs(t.row_a[i] - expect_a[i]) <= 0.01);
    CHECK(std::abs(t.row_b[i] - expect_b[i]) <= 0.01);
  }
}

TEST_CASE("ratio table 2: curved exponential family") {
  const RatioTable t = ratio_table(2);
  REQUIRE(t.qs == std::vector<int>{1, 2, 5, 10, 20, 50});
  const std::vector<double> expect_a = {1.11, 2.45, 6.77, 14.17, 29.09, 74.01};
  const std::vector<double> expect_b = {1.11, 2.21, 5.53, 11.05, 22.11, 55.26};
  for (std::size_t i = 0; i < t.qs.size(); ++i) {
    CAPTURE(t.qs[i]);
    CHECK(std::abs(t.row_a[i] - expect_a[i]) <= 0.01);
    CHECK(std::abs(t.row_b[i] - expect_b[i]) <= 0.01);
  }
  // q = 1 has a single unit mean in both cases
  CHECK(t.row_a[0] == doctest::Approx(t.row_b[0]).epsilon(1e-12));
}

TEST_CASE("table case construction invariants") {
  SUBCASE("case (a) implied interest value") {
    const TableCaseResult r = table_case({1, "a", 5});
    CHECK(std::abs(r.theta(0) - 0.6065) < 5e-5);
  }
  SUBCASE("case (b) rate layout") {
    const TableCaseResult r = table_case({1, "b", 10});
    // theta = (psi, phi_2..phi_q); common value in the leading block, the
    // distinguished rate solves exp(-phi_q t0) = q psi / 2.
    const double psi = r.theta(0);
    CHECK(psi == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    const double phi_q = r.theta(9);
    CHECK(std::exp(-0.5 * phi_q) == doctest::Approx(10.0 * psi / 2.0).epsilon(1e-9));
    for (int a = 1; a < 9; ++a) {
      CHECK(r.theta(a) == doctest::Approx(r.theta(1)).epsilon(1e-12));
    }
  }
  SUBCASE("table 2 case rules") {
    const TableCaseResult ra = table_case({2, "a", 4});
    for (int j = 0; j < 4; ++j) {
      CHECK(ra.theta(1 + j) == doctest::Approx(static_cast<double>(j + 1)));
    }
    const TableCaseResult rb = table_case({2, "b", 4});
    for (int j = 0; j < 4; ++j) CHECK(rb.theta(1 + j) == 1.0);
  }
  SUBCASE("bad input is rejected") {
    CHECK_THROWS_AS(table_case({3, "a", 5}), ConfigError);
    CHECK_THROWS_AS(table_case({1, "c", 5}), ConfigError);
    CHECK_THROWS_AS(table_case({1, "a", 1}), ConfigError);
  }
}

TEST_CASE("independent route to the table ratios") {
  // Differentiate the expected log-likelihood surfaces numerically and push
  // the arrays through the same contraction formulas.
  SUBCASE("multi-sample exponential, case (a), q = 3") {
    const TableCaseResult r = table_case({1, "a", 3});
    const CumulantSet ref = oracle::cumulants_from_surface(
        oracle::surf_multi_exp(1, 3, 0.5), r.theta, 3);
    const AdjustmentReport rep = adjustment_report(ref, info_geometry(ref.lam2));
    CHECK(*rep.ratio == doctest::Approx(r.ratio).epsilon(1e-5));
  }
  SUBCASE("multi-sample exponential, case (b), q = 5") {
    const TableCaseResult r = table_case({1, "b", 5});
    const CumulantSet ref = oracle::cumulants_from_surface(
        oracle::surf_multi_exp(1, 5, 0.5), r.theta, 3);
    const AdjustmentReport rep = adjustment_report(ref, info_geometry(ref.lam2));
    CHECK(*rep.ratio == doctest::Approx(r.ratio).epsilon(1e-5));
  }
  SUBCASE("curved normal, case (a), q = 4") {
    const TableCaseResult r = table_case({2, "a", 4});
    const CumulantSet ref = oracle::cumulants_from_surface(
        oracle::surf_curved_normal(1, 4), r.theta, 3);
    const AdjustmentReport rep = adjustment_report(ref, info_geometry(ref.lam2));
    CHECK(*rep.ratio == doctest::Approx(r.ratio).epsilon(1e-5));
  }
}

TEST_CASE("nested-loop contraction against the engine on a table case") {
  // Triple contraction lam^{1r} lam^{st} lam_rst written out by hand.
  const TableCaseResult r = table_case({1, "a", 2});
  const CumulantSet cs = r.model->cumulants(r.theta, 3);
  const InfoGeometry g = info_geometry(cs.lam2);
  const int d = cs.dim;
  double by_hand = 0.0;
  for (int rr = 0; rr < d; ++rr)
    for (int s = 0; s < d; ++s)
      for (int t = 0; t < d; ++t)
        by_hand += g.lambda_up(0, rr) * g.lambda_up(s, t) * cs.lam3(rr, s, t);

  const SymTensor a = g.lambda_up.fixed(0, 0);
  const double by_engine =
      einsum_scalar("r,st,rst->", {&a, &g.lambda_up, &cs.lam3});
  CHECK(by_engine == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("the ratio is constant in theta only for the simple families") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.6, 1.8);

  SUBCASE("stratified scale models: constant") {
    const auto ns = build_model("neyman-scott", {{"n", 9}, {"q", 4}});
    const CumulantSet c0 = ns->cumulants(ns->theta0(), 3);
    const auto r0 = adjustment_report(c0, info_geometry(c0.lam2));
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd th(5);
      th << u(rng), u(rng), u(rng), u(rng), u(rng);
      const CumulantSet cs = ns->cumulants(th, 3);
      const auto rep = adjustment_report(cs, info_geometry(cs.lam2));
      CHECK(rep.g_inf == doctest::Approx(r0.g_inf).epsilon(1e-10));
      CHECK(rep.g_np == doctest::Approx(r0.g_np).epsilon(1e-10));
    }
  }
  SUBCASE("curved normal: the two table cases differ at the same q") {
    const double ra = table_case({2, "a", 5}).ratio;
    const double rb = table_case({2, "b", 5}).ratio;
    CHECK(std::abs(ra - rb) > 0.5);
  }
  SUBCASE("multi-sample exponential: the two table cases differ at the same q") {
    const double ra = table_case({1, "a", 5}).ratio;
    const double rb = table_case({1, "b", 5}).ratio;
    CHECK(std::abs(ra - rb) > 1.0);
  }
}

TEST_CASE("two-decimal rounding is half away from zero") {
  CHECK(round2(2.255) == doctest::Approx(2.26));
  CHECK(round2(-2.255) == doctest::Approx(-2.26));
  CHECK(round2(1.114) == doctest::Approx(1.11));
}
