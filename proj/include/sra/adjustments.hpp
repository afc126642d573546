#pragma once

#include <optional>
#include <string>

#include "sra/cumulants.hpp"
#include "sra/geometry.hpp"

namespace sra {

/// Leading terms of the mean decomposition of the signed root: g_inf is the
/// information part (unchanged by orthogonal nuisance parameters), g_np the
/// nuisance part (zero without nuisance parameters). Both are O(n^{-1/2}).
struct AdjustmentReport {
  double g_inf = 0.0;
  double g_np = 0.0;
  double d_quant = 0.0;            // profile-curvature quantity d
  double rho = 0.0;                // eta^{1/2} g_np
  double eta = 0.0;
  double er_leading = 0.0;         // leading term of E{R}
  std::optional<double> ratio;     // g_np / g_inf; empty when g_inf ~ 0
  double a0 = 0.0;                 // acceleration alias (= g_inf)
  double z0 = 0.0;                 // bias-correction alias (= g_inf + g_np)
  Provenance provenance = Provenance::analytic;
};

AdjustmentReport adjustment_report(const CumulantSet& cs, const InfoGeometry& g);

/// Reduced nuisance-mean formula valid under parameter orthogonality
/// (lam2[0,a] = 0 identically for nuisance a). Cross-check path; throws
/// NumericError naming the offending entry when the input is not orthogonal.
double orthogonal_gnp(const CumulantSet& cs, const InfoGeometry& g,
                      double tol = 1e-8);

struct BartlettDecomposition {
  double b = 0.0;
  double b_inf = 0.0;
  double b_np = 0.0;           // computed as b - b_inf
  double b_np_explicit = 0.0;  // independent evaluation of the explicit form
};

/// Needs a depth-4 CumulantSet (lam4, dlam3, ddlam2).
BartlettDecomposition bartlett_decompose(const CumulantSet& cs,
                                         const InfoGeometry& g);

/// Orthogonal-case closed form for b_np; cross-check path.
double orthogonal_bnp(const CumulantSet& cs, const InfoGeometry& g,
                      double tol = 1e-8);

enum class PivotKind {
  signed_root,
  wald_obs,
  wald_exp,
  score_obs,
  score_exp,
  adj_signed_root,
  adj_wald,
  adj_score,
};

PivotKind pivot_kind_from_string(const std::string& s);
std::string to_string(PivotKind k);

struct PivotCumulants {
  PivotKind kind = PivotKind::signed_root;
  double kappa1 = 0.0;
  double kappa3 = 0.0;
};

PivotCumulants pivot_cumulants(const AdjustmentReport& rep, PivotKind kind);

/// t - kappa3 t^2/6 - kappa1 + kappa3/6.
double cornish_fisher(double t, const PivotCumulants& pc);

/// Predicted O(n^-1) bias of the interest MLE: -(2 g_inf + g_np - d)/sqrt(eta).
double mle_mean_expansion(const AdjustmentReport& rep);

/// Leading term of E{M_1(psi)}: -sqrt(eta) * g_np.
double profile_score_mean(const AdjustmentReport& rep);

}  // namespace sra
