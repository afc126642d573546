#pragma once

#include <Eigen/Dense>

#include "sra/tensor.hpp"

namespace sra {

/// Derived information-geometry quantities at a parameter point.
/// Index 1 of the paper (the interest parameter) is slot 0 here.
///
///   lambda_up  (lam^{rs})  matrix inverse of lam2
///   eta        -1/lam^{11}, the adjusted information for the interest
///   tau        eta * lam^{1r} lam^{1s}   (rank one)
///   nu         lam^{rs} + tau^{rs}       (first row/column vanish)
struct InfoGeometry {
  int dim = 0;
  SymTensor lambda_up;
  double eta = 0.0;
  SymTensor tau;
  SymTensor nu;
  double condition = 1.0;     // |eig|_max / |eig|_min of lam2
  double min_abs_eig = 0.0;
};

/// Builds the geometry from lam2. Throws NumericError naming the offending
/// eigenvalue when the expected information is singular or not negative
/// definite; a pseudo-inverse is never substituted.
InfoGeometry info_geometry(const SymTensor& lam2);

Eigen::MatrixXd to_matrix(const SymTensor& t2);
SymTensor from_matrix(const Eigen::MatrixXd& m, bool symmetric = true);

}  // namespace sra
