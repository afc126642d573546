#include <cmath>

#include "doctest.h"
#include "sra/jet.hpp"
#include "sra/param_map.hpp"

using sra::Jet;

TEST_CASE("jet arithmetic reproduces closed-form mixed partials") {
  // f(x, y) = exp(x) * log(y) + x / y at (0.5, 2.0)
  const double x0 = 0.5, y0 = 2.0;
  const Jet x = Jet::variable(2, 0, x0);
  const Jet y = Jet::variable(2, 1, y0);
  const Jet f = exp(x) * log(y) + x / y;

  CHECK(f.value() == doctest::Approx(std::exp(x0) * std::log(y0) + x0 / y0));
  CHECK(f.partial(std::array{1, 0}) ==
        doctest::Approx(std::exp(x0) * std::log(y0) + 1.0 / y0));
  CHECK(f.partial(std::array{0, 1}) ==
        doctest::Approx(std::exp(x0) / y0 - x0 / (y0 * y0)));
  CHECK(f.partial(std::array{1, 1}) ==
        doctest::Approx(std::exp(x0) / y0 - 1.0 / (y0 * y0)));
  CHECK(f.partial(std::array{0, 3}) ==
        doctest::Approx(2.0 * std::exp(x0) / std::pow(y0, 3) +
                        6.0 * x0 / std::pow(y0, 4)));
  CHECK(f.partial(std::array{2, 2}) ==
        doctest::Approx(-std::exp(x0) / (y0 * y0)));
}

TEST_CASE("pow and sqrt jets") {
  const Jet x = Jet::variable(1, 0, 4.0);
  const Jet r = sqrt(x);
  CHECK(r.value() == doctest::Approx(2.0));
  CHECK(r.partial(std::array{1}) == doctest::Approx(0.25));
  CHECK(r.partial(std::array{2}) == doctest::Approx(-1.0 / 32.0));
  const Jet p = pow(x, -2.0);
  CHECK(p.partial(std::array{1}) == doctest::Approx(-2.0 * std::pow(4.0, -3.0)));
}

TEST_CASE("implicit root derivatives match the explicit inverse") {
  // 2 w^4 + psi w - u = 0. Check dw/dpsi and dw/du against implicit
  // differentiation: dw = (-w dpsi + du) / (8 w^3 + psi).
  const double psi = 1.3, u = 2.7;
  const Jet jp = Jet::variable(2, 0, psi);
  const Jet ju = Jet::variable(2, 1, u);
  const std::array<Jet, 2> args = {jp, ju};
  auto g = [](const Jet& w, std::span<const Jet> a) {
    return 2.0 * (w * w) * (w * w) + a[0] * w - a[1];
  };
  // scalar root by bisection
  double lo = 0.0, hi = 2.0;
  auto gs = [&](double w) { return 2.0 * w * w * w * w + psi * w - u; };
  while (gs(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gs(mid) < 0.0 ? lo : hi) = mid;
  }
  const Jet w = sra::implicit_root(g, args, 0.5 * (lo + hi));
  const double wv = w.value();
  CHECK(gs(wv) == doctest::Approx(0.0).epsilon(1e-12));
  const double denom = 8.0 * wv * wv * wv + psi;
  CHECK(w.partial(std::array{1, 0}) == doctest::Approx(-wv / denom));
  CHECK(w.partial(std::array{0, 1}) == doctest::Approx(1.0 / denom));

  // Higher orders against finite differences of the scalar solve.
  auto solve = [&](double p, double uu) {
    double a = 0.0, b = 2.0;
    auto f = [&](double ww) { return 2.0 * ww * ww * ww * ww + p * ww - uu; };
    while (f(b) < 0.0) b *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (a + b);
      (f(mid) < 0.0 ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };
  const double h = 1e-4;
  const double d2_fd =
      (solve(psi + h, u) - 2.0 * wv + solve(psi - h, u)) / (h * h);
  CHECK(w.partial(std::array{2, 0}) == doctest::Approx(d2_fd).epsilon(1e-4));
}

TEST_CASE("finite-difference map components agree with jet components") {
  auto fn = [](std::span<const sra::Jet> a) { return exp(a[0]) * sqrt(a[1]); };
  auto fd = [](std::span<const double> x) {
    return std::exp(x[0]) * std::sqrt(x[1]);
  };
  const sra::MapComponent jc = sra::MapComponent::jet({0, 1}, fn);
  const sra::MapComponent fc = sra::MapComponent::finite_difference({0, 1}, fd);
  Eigen::VectorXd th(2);
  th << 0.3, 1.7;
  const sra::CompDerivs a = jc.derivs(th, 2);
  const sra::CompDerivs b = fc.derivs(th, 2);
  CHECK(a.value == doctest::Approx(b.value));
  for (int p = 0; p < 2; ++p) {
    CHECK(a.a1(p) == doctest::Approx(b.a1(p)).epsilon(1e-9));
    for (int q = 0; q < 2; ++q) {
      CHECK(a.a2(p, q) == doctest::Approx(b.a2(p, q)).epsilon(1e-7));
    }
  }
}
