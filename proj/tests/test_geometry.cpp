#include <cmath>
#include <random>

#include "doctest.h"
#include "sra/errors.hpp"
#include "sra/geometry.hpp"
#include "sra/model.hpp"
#include "sra/models.hpp"

using namespace sra;

namespace {

InfoGeometry geometry_of(const Model& m) {
  return info_geometry(m.cumulants(m.theta0(), 3).lam2);
}

}  // namespace

TEST_CASE("d = 1 geometry is forced by the definitions") {
  const double n = 12.0;
  SymTensor lam2(2, 1, {{0, 1}});
  lam2.set_entry(std::array{0, 0}, -n);
  const InfoGeometry g = info_geometry(lam2);
  CHECK(g.eta == doctest::Approx(n));
  CHECK(g.tau(0, 0) == doctest::Approx(1.0 / n));
  CHECK(g.nu(0, 0) == 0.0);
}

TEST_CASE("adjusted information matches the published forms") {
  const auto nr = build_model("normal-regression", {{"n", 25}, {"q", 3},
                                                    {"sigma", 2.0}});
  CHECK(geometry_of(*nr).eta == doctest::Approx(2.0 * 25 / 4.0));

  const auto ns = build_model("neyman-scott", {{"n", 10}, {"q", 4},
                                               {"sigma", 2.0}});
  CHECK(geometry_of(*ns).eta == doctest::Approx(2.0 * 10 * 4 / 4.0));

  const auto ig = build_model("inverse-gaussian",
                              {{"n", 6}, {"q", 3}, {"psi", 2.0}});
  CHECK(geometry_of(*ig).eta == doctest::Approx(6.0 * 3 / (2.0 * 4.0)));
}

TEST_CASE("inverse residual, nu invariant, and tau structure") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd phi(3);
    phi << u(rng), u(rng), u(rng);
    const auto ig = make_inverse_gaussian(8, 3, u(rng), phi);
    const CumulantSet cs = ig->cumulants(ig->theta0(), 3);
    const InfoGeometry g = info_geometry(cs.lam2);

    const Eigen::MatrixXd prod = to_matrix(g.lambda_up) * to_matrix(cs.lam2);
    const Eigen::MatrixXd res =
        prod - Eigen::MatrixXd::Identity(g.dim, g.dim);
    CHECK(res.cwiseAbs().maxCoeff() < 1e-10 * g.condition);

    for (int s = 0; s < g.dim; ++s) {
      CHECK(std::abs(g.nu(0, s)) <= 1e-12);
      CHECK(std::abs(g.nu(s, 0)) <= 1e-12);
    }
    CHECK(g.eta > 0.0);
    for (int r = 0; r < g.dim; ++r)
      for (int s = 0; s < g.dim; ++s)
        CHECK(g.tau(r, s) ==
              doctest::Approx(g.eta * g.lambda_up(0, r) * g.lambda_up(0, s)));
  }
}

TEST_CASE("orthogonal models: tau is confined to the interest block") {
  const auto ns = build_model("neyman-scott", {{"n", 7}, {"q", 3}});
  const CumulantSet cs = ns->cumulants(ns->theta0(), 3);
  const InfoGeometry g = info_geometry(cs.lam2);
  CHECK(g.tau(0, 0) == doctest::Approx(1.0 / (-cs.lam2(0, 0))));
  for (int r = 0; r < g.dim; ++r)
    for (int s = 0; s < g.dim; ++s) {
      if (r == 0 && s == 0) continue;
      CHECK(std::abs(g.tau(r, s)) < 1e-14);
    }
  for (int a = 1; a < g.dim; ++a)
    for (int b = 1; b < g.dim; ++b)
      CHECK(g.nu(a, b) == doctest::Approx(g.lambda_up(a, b)));
}

TEST_CASE("non-regular information is rejected with the offending eigenvalue") {
  SymTensor lam2(2, 2, {{0, 1}});
  lam2.set_entry(std::array{0, 0}, -1.0);
  lam2.set_entry(std::array{1, 1}, 2.0);  // wrong sign
  CHECK_THROWS_WITH_AS(info_geometry(lam2),
                       doctest::Contains("eigenvalue"), NumericError);

  SymTensor sing(2, 2, {{0, 1}});
  sing.set_entry(std::array{0, 0}, -1.0);
  // second eigenvalue exactly zero
  CHECK_THROWS_AS(info_geometry(sing), NumericError);
}
