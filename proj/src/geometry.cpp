#include "sra/geometry.hpp"

#include <cmath>
#include <sstream>

#include "sra/errors.hpp"

namespace sra {

Eigen::MatrixXd to_matrix(const SymTensor& t2) {
  if (t2.order() != 2) throw std::invalid_argument("to_matrix: order != 2");
  const int d = t2.dim();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = t2(i, j);
  }
  return m;
}

SymTensor from_matrix(const Eigen::MatrixXd& m, bool symmetric) {
  const int d = static_cast<int>(m.rows());
  SymTensor t(2, d, symmetric ? std::vector<std::vector<int>>{{0, 1}}
                              : std::vector<std::vector<int>>{});
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      t.data()[static_cast<std::size_t>(i) * d + j] = m(i, j);
    }
  }
  return t;
}

InfoGeometry info_geometry(const SymTensor& lam2) {
  const int d = lam2.dim();
  const Eigen::MatrixXd m = to_matrix(lam2);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw NumericError("info_geometry: eigen decomposition failed");
  }
  const Eigen::VectorXd ev = es.eigenvalues();
  const double max_abs = std::max(std::abs(ev(0)), std::abs(ev(d - 1)));
  const double sing_tol = 1e-13 * std::max(max_abs, 1.0);
  for (int i = 0; i < d; ++i) {
    if (!(ev(i) < -sing_tol)) {
      std::ostringstream os;
      os << "info_geometry: non-regular information, eigenvalue " << i
         << " = " << ev(i) << " is not negative (expected information must be"
         << " negative definite)";
      throw NumericError(os.str());
    }
  }

  InfoGeometry g;
  g.dim = d;
  g.min_abs_eig = std::abs(ev(d - 1));  // eigenvalues ascending, all negative
  for (int i = 0; i < d; ++i) g.min_abs_eig = std::min(g.min_abs_eig, std::abs(ev(i)));
  g.condition = max_abs / g.min_abs_eig;

  const Eigen::MatrixXd inv =
      es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  g.lambda_up = from_matrix(0.5 * (inv + inv.transpose()));

  const double l11 = g.lambda_up(0, 0);
  if (!(l11 < 0.0)) {
    throw NumericError("info_geometry: lam^{11} is not negative");
  }
  g.eta = -1.0 / l11;

  g.tau = SymTensor(2, d, {{0, 1}});
  g.nu = SymTensor(2, d, {{0, 1}});
  for (int r = 0; r < d; ++r) {
    for (int s = 0; s < d; ++s) {
      const double t = g.eta * g.lambda_up(0, r) * g.lambda_up(0, s);
      g.tau.data()[static_cast<std::size_t>(r) * d + s] = t;
      g.nu.data()[static_cast<std::size_t>(r) * d + s] = g.lambda_up(r, s) + t;
    }
  }
  // nu^{1s} = lam^{1s}(1 + eta lam^{11}) vanishes identically; pin it so the
  // invariant holds to the last bit.
  for (int s = 0; s < d; ++s) {
    g.nu.data()[static_cast<std::size_t>(0) * d + s] = 0.0;
    g.nu.data()[static_cast<std::size_t>(s) * d + 0] = 0.0;
  }
  return g;
}

}  // namespace sra
