#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "sra/rng.hpp"
#include "sra/stats.hpp"

namespace st = sra::stats;

TEST_CASE("normal quantile inverts the normal cdf") {
  for (double p : {0.01, 0.1, 0.5, 0.9, 0.95, 0.99}) {
    CHECK(st::normal_cdf(st::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(st::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
}

TEST_CASE("chi-squared cdf reference values") {
  CHECK(st::chi2_cdf(1.0, 1.0) == doctest::Approx(0.6826894921).epsilon(1e-9));
  CHECK(st::chi2_cdf(5.0, 5.0) == doctest::Approx(0.5841198130).epsilon(1e-8));
}

TEST_CASE("sample moments and KS distance") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const auto m = st::moments(x);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.var == doctest::Approx(5.0 / 3.0));
  CHECK(m.skewness == doctest::Approx(0.0));

  // KS of a large standard normal sample should be near 1/sqrt(B) scale.
  sra::RngStream rng(99);
  std::vector<double> z(20000);
  for (auto& v : z) v = rng.normal();
  const double ks = st::ks_distance_std_normal(z);
  CHECK(ks < 1.36 * 2.0 / std::sqrt(20000.0));
}

TEST_CASE("tail p-values use the +1/(B+1) convention") {
  std::vector<double> s = {-1.0, 0.0, 1.0};
  CHECK(st::p_value_lower(s, -2.0) == doctest::Approx(0.25));
  CHECK(st::p_value_upper(s, -2.0) == doctest::Approx(1.0));
  CHECK(st::p_value_lower(s, 10.0) == doctest::Approx(1.0));
}

TEST_CASE("stream sampler moments and determinism") {
  sra::RngStream a(1234), b(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());

  sra::RngStream rng(5);
  const int B = 200000;
  double se = 0.0, see = 0.0;
  for (int i = 0; i < B; ++i) {
    se += rng.normal();
    see += rng.exponential();
  }
  CHECK(std::abs(se / B) < 4.0 / std::sqrt(static_cast<double>(B)));
  CHECK(std::abs(see / B - 1.0) < 4.0 / std::sqrt(static_cast<double>(B)));
}

TEST_CASE("inverse Gaussian sampler matches the density mean by quadrature") {
  const double psi = 2.0, phi = 0.5;
  const double mean_quad = oracle::inverse_gaussian_mean_quadrature(psi, phi);
  CHECK(mean_quad == doctest::Approx(std::sqrt(psi / phi)).epsilon(1e-6));

  sra::RngStream rng(17);
  const int B = 400000;
  const double mu = std::sqrt(psi / phi);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < B; ++i) {
    const double y = rng.inverse_gaussian(mu, psi);
    s += y;
    s2 += y * y;
  }
  const double mean = s / B;
  const double sd = std::sqrt(s2 / B - mean * mean);
  CHECK(std::abs(mean - mean_quad) < 4.0 * sd / std::sqrt(static_cast<double>(B)));
}
