#include "sra/cumulants.hpp"

#include <algorithm>
#include <cmath>

namespace sra {

std::string to_string(Provenance p) {
  return p == Provenance::analytic ? "analytic" : "monte_carlo";
}

CumulantSet make_cumulant_set(int dim, int depth) {
  CumulantSet cs;
  cs.dim = dim;
  cs.lam2 = SymTensor(2, dim, {{0, 1}});
  cs.lam11 = SymTensor(2, dim, {{0, 1}});
  cs.lam3 = SymTensor(3, dim, {{0, 1, 2}});
  cs.lam21 = SymTensor(3, dim, {{0, 1}});
  cs.lam111 = SymTensor(3, dim, {{0, 1, 2}});
  cs.dlam2 = SymTensor(3, dim, {{0, 1}});
  if (depth >= 4) {
    cs.lam4 = SymTensor(4, dim, {{0, 1, 2, 3}});
    cs.dlam3 = SymTensor(4, dim, {{0, 1, 2}});
    cs.ddlam2 = SymTensor(4, dim, {{0, 1}, {2, 3}});
  }
  return cs;
}

IdentityResiduals identity_residuals(const CumulantSet& cs) {
  IdentityResiduals r;
  const int d = cs.dim;
  double scale = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      scale = std::max(scale, std::abs(cs.lam2(i, j)));
      r.first_bartlett =
          std::max(r.first_bartlett, std::abs(cs.lam2(i, j) + cs.lam11(i, j)));
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        scale = std::max(scale, std::abs(cs.lam3(i, j, k)));
        const double second = cs.lam3(i, j, k) + cs.lam21(i, j, k) +
                              cs.lam21(i, k, j) + cs.lam21(j, k, i) +
                              cs.lam111(i, j, k);
        r.second_bartlett = std::max(r.second_bartlett, std::abs(second));
        const double dcons =
            cs.dlam2(i, j, k) - cs.lam3(i, j, k) - cs.lam21(i, j, k);
        r.dlam2_consistency = std::max(r.dlam2_consistency, std::abs(dcons));
      }
    }
  }
  r.scale = std::max(scale, 1.0);
  return r;
}

}  // namespace sra
