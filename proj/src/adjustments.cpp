#include "sra/adjustments.hpp"

#include <cmath>
#include <sstream>

#include "sra/errors.hpp"

namespace sra {

namespace {

// a_r = lam^{1r} as a plain vector.
Eigen::VectorXd interest_row(const InfoGeometry& g) {
  Eigen::VectorXd a(g.dim);
  for (int r = 0; r < g.dim; ++r) a(r) = g.lambda_up(0, r);
  return a;
}

void require_orthogonal(const CumulantSet& cs, double tol) {
  double scale = 1.0;
  for (int i = 0; i < cs.dim; ++i) scale = std::max(scale, std::abs(cs.lam2(i, i)));
  for (int a = 1; a < cs.dim; ++a) {
    if (std::abs(cs.lam2(0, a)) > tol * scale) {
      std::ostringstream os;
      os << "orthogonal reduction requires lam2[0," << a
         << "] = 0; got " << cs.lam2(0, a);
      throw NumericError(os.str());
    }
  }
}

}  // namespace

AdjustmentReport adjustment_report(const CumulantSet& cs, const InfoGeometry& g) {
  const int d = cs.dim;
  const Eigen::VectorXd a = interest_row(g);
  const double sqeta = std::sqrt(g.eta);

  double ginf = 0.0, gnp = 0.0, dq = 0.0, er = 0.0;
  for (int r = 0; r < d; ++r) {
    if (a(r) == 0.0) continue;
    double acc_inf = 0.0, acc_np = 0.0, acc_d = 0.0, acc_er = 0.0;
    for (int s = 0; s < d; ++s) {
      for (int t = 0; t < d; ++t) {
        const double l21 = cs.lam21(r, s, t);
        const double l3 = cs.lam3(r, s, t);
        const double tau = g.tau(s, t);
        const double nu = g.nu(s, t);
        const double lup = g.lambda_up(s, t);
        acc_inf += tau * (0.5 * l21 + l3 / 6.0);
        acc_np += nu * (l21 + 0.5 * l3);
        acc_d += tau * l3;
        acc_er += lup * (l21 + 0.5 * l3) + tau * (0.5 * l21 + l3 / 3.0);
      }
    }
    ginf += a(r) * acc_inf;
    gnp += a(r) * acc_np;
    dq += a(r) * acc_d;
    er += a(r) * acc_er;
  }

  AdjustmentReport rep;
  rep.eta = g.eta;
  rep.g_inf = sqeta * ginf;
  rep.g_np = -sqeta * gnp;
  rep.d_quant = -sqeta * dq / 6.0;
  rep.rho = -g.eta * gnp;
  rep.er_leading = sqeta * er;
  rep.a0 = rep.g_inf;
  rep.z0 = rep.g_inf + rep.g_np;
  rep.provenance = cs.provenance;
  if (std::abs(rep.g_inf) > 1e-12 * (1.0 + std::abs(rep.g_np))) {
    rep.ratio = rep.g_np / rep.g_inf;
  }
  return rep;
}

double orthogonal_gnp(const CumulantSet& cs, const InfoGeometry& g, double tol) {
  require_orthogonal(cs, tol);
  const int d = cs.dim;
  const double l11 = cs.lam2(0, 0);
  double acc = 0.0;
  for (int a = 1; a < d; ++a) {
    for (int b = 1; b < d; ++b) {
      acc += g.lambda_up(a, b) * cs.lam3(a, b, 0);
    }
  }
  return -0.5 * std::pow(-l11, -0.5) * acc;
}

namespace {

// The three Lawley factor groups, each contracted against a pair/triple of
// symmetric matrices. Index layout follows the decomposition displays:
//   S1(A,B)   = A^{rs} B^{tu} (lam4/4 - dlam3[rst|u] + ddlam2[rt|su])
//   S2(A,B,C) = A^{rs} B^{tu} C^{vw} (lam3 lam3 / 4 - lam3 dlam2 + dlam2 dlam2)
//   S3(A,B,C) = A^{ru} B^{sw} C^{tv} (lam3 lam3 / 6 - lam3 dlam2 + dlam2 dlam2)
double s1_term(const CumulantSet& cs, const SymTensor& A, const SymTensor& B) {
  const int d = cs.dim;
  const SymTensor& lam4 = *cs.lam4;
  const SymTensor& dlam3 = *cs.dlam3;
  const SymTensor& ddlam2 = *cs.ddlam2;
  double acc = 0.0;
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) {
      const double ars = A(r, s);
      if (ars == 0.0) continue;
      for (int t = 0; t < d; ++t)
        for (int u = 0; u < d; ++u) {
          const double core = 0.25 * lam4(r, s, t, u) - dlam3(r, s, t, u) +
                              ddlam2(r, t, s, u);
          acc += ars * B(t, u) * core;
        }
    }
  return acc;
}

double s2_term(const CumulantSet& cs, const SymTensor& A, const SymTensor& B,
               const SymTensor& C) {
  const int d = cs.dim;
  // F1_t = A^{rs} X[r,s,t];  F2_u = C^{vw} Y[u,v,w]
  Eigen::VectorXd f1_lam3(d), f1_dlam2(d), f2_lam3(d), f2_dlam2(d);
  for (int t = 0; t < d; ++t) {
    double a3 = 0.0, a2 = 0.0, c3 = 0.0, c2 = 0.0;
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s) {
        a3 += A(r, s) * cs.lam3(r, s, t);
        a2 += A(r, s) * cs.dlam2(r, s, t);
        c3 += C(r, s) * cs.lam3(t, r, s);
        c2 += C(r, s) * cs.dlam2(t, r, s);
      }
    f1_lam3(t) = a3;
    f1_dlam2(t) = a2;
    f2_lam3(t) = c3;
    f2_dlam2(t) = c2;
  }
  double acc = 0.0;
  for (int t = 0; t < d; ++t)
    for (int u = 0; u < d; ++u) {
      acc += B(t, u) * (0.25 * f1_lam3(t) * f2_lam3(u) -
                        f1_lam3(t) * f2_dlam2(u) + f1_dlam2(t) * f2_dlam2(u));
    }
  return acc;
}

double s3_term(const CumulantSet& cs, const SymTensor& A, const SymTensor& B,
               const SymTensor& C) {
  const int d = cs.dim;
  // Contract X[r,s,t] -> K[u,w,v] = A^{ru} B^{sw} C^{tv} X[r,s,t], then pair
  // with Y[u,v,w].
  auto sandwich = [&](const SymTensor& X, const SymTensor& Y) {
    double acc = 0.0;
    std::vector<double> G(static_cast<std::size_t>(d) * d * d, 0.0);
    // G[u,s,t] = A^{ru} X[r,s,t]
    for (int u = 0; u < d; ++u)
      for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) {
          double v = 0.0;
          for (int r = 0; r < d; ++r) v += A(r, u) * X(r, s, t);
          G[(static_cast<std::size_t>(u) * d + s) * d + t] = v;
        }
    std::vector<double> H(static_cast<std::size_t>(d) * d * d, 0.0);
    // H[u,w,t] = B^{sw} G[u,s,t]
    for (int u = 0; u < d; ++u)
      for (int w = 0; w < d; ++w)
        for (int t = 0; t < d; ++t) {
          double v = 0.0;
          for (int s = 0; s < d; ++s)
            v += B(s, w) * G[(static_cast<std::size_t>(u) * d + s) * d + t];
          H[(static_cast<std::size_t>(u) * d + w) * d + t] = v;
        }
    // acc = C^{tv} H[u,w,t] Y[u,v,w]
    for (int u = 0; u < d; ++u)
      for (int w = 0; w < d; ++w)
        for (int t = 0; t < d; ++t) {
          const double h = H[(static_cast<std::size_t>(u) * d + w) * d + t];
          if (h == 0.0) continue;
          for (int v = 0; v < d; ++v) acc += C(t, v) * h * Y(u, v, w);
        }
    return acc;
  };
  const double t33 = sandwich(cs.lam3, cs.lam3);
  const double t3d = sandwich(cs.lam3, cs.dlam2);
  const double tdd = sandwich(cs.dlam2, cs.dlam2);
  return t33 / 6.0 - t3d + tdd;
}

}  // namespace

BartlettDecomposition bartlett_decompose(const CumulantSet& cs,
                                         const InfoGeometry& g) {
  if (!cs.has_fourth_order()) {
    throw NumericError(
        "bartlett_decompose: missing fourth-order arrays (lam4, dlam3, "
        "ddlam2); build the cumulant set at depth 4");
  }
  const SymTensor& lam = g.lambda_up;
  const SymTensor& tau = g.tau;
  const SymTensor& nu = g.nu;

  const double b = (s1_term(cs, lam, lam) - s1_term(cs, nu, nu)) -
                   (s2_term(cs, lam, lam, lam) - s2_term(cs, nu, nu, nu)) -
                   (s3_term(cs, lam, lam, lam) - s3_term(cs, nu, nu, nu));
  const double b_inf = s1_term(cs, tau, tau) + s2_term(cs, tau, tau, tau) +
                       s3_term(cs, tau, tau, tau);

  // Independent explicit route for b_np.
  const double np1 = s1_term(cs, lam, lam) - s1_term(cs, tau, tau) -
                     s1_term(cs, nu, nu);
  const double np2 = s2_term(cs, lam, lam, lam) + s2_term(cs, tau, tau, tau) -
                     s2_term(cs, nu, nu, nu);
  const double np3 = s3_term(cs, lam, lam, lam) + s3_term(cs, tau, tau, tau) -
                     s3_term(cs, nu, nu, nu);

  BartlettDecomposition out;
  out.b = b;
  out.b_inf = b_inf;
  out.b_np = b - b_inf;
  out.b_np_explicit = np1 - np2 - np3;
  return out;
}

double orthogonal_bnp(const CumulantSet& cs, const InfoGeometry& g, double tol) {
  require_orthogonal(cs, tol);
  if (!cs.has_fourth_order()) {
    throw NumericError("orthogonal_bnp: missing fourth-order arrays");
  }
  const int d = cs.dim;
  const double l11 = cs.lam2(0, 0);
  const SymTensor& lam4 = *cs.lam4;
  const SymTensor& dlam3 = *cs.dlam3;
  const SymTensor& lup = g.lambda_up;

  double term1 = 0.0, term2 = 0.0, term3 = 0.0;
  for (int a = 1; a < d; ++a) {
    for (int b = 1; b < d; ++b) {
      const double w = lup(a, b);
      if (w == 0.0) continue;
      term1 += w * (0.5 * lam4(0, 0, a, b) - dlam3(0, a, b, 0) -
                    dlam3(0, 0, a, b));
      term2 += w * (0.5 * cs.lam3(0, 0, 0) * cs.lam3(0, a, b) +
                    0.25 * cs.lam3(0, 0, a) * cs.lam3(0, 0, b) -
                    cs.lam3(0, a, b) * cs.dlam2(0, 0, 0) -
                    cs.lam3(0, 0, a) * cs.dlam2(0, 0, b) -
                    cs.lam3(0, 0, a) * cs.dlam2(0, b, 0) +
                    cs.dlam2(0, 0, 0) * cs.dlam2(a, b, 0) +
                    0.5 * cs.lam3(0, 0, a) * cs.lam3(0, 0, b));
    }
  }
  for (int a = 1; a < d; ++a)
    for (int b = 1; b < d; ++b)
      for (int c = 1; c < d; ++c)
        for (int e = 1; e < d; ++e) {
          const double w = lup(a, b) * lup(c, e);
          if (w == 0.0) continue;
          term3 += w * (0.5 * cs.lam3(0, 0, a) * cs.lam3(b, c, e) +
                        0.25 * cs.lam3(0, a, b) * cs.lam3(0, c, e) +
                        0.5 * cs.lam3(0, a, c) * cs.lam3(0, b, e) -
                        cs.lam3(0, 0, a) * cs.dlam2(b, c, e) -
                        cs.lam3(0, a, b) * cs.dlam2(0, c, e) -
                        cs.lam3(0, a, c) * cs.dlam2(b, e, 0) +
                        cs.dlam2(0, 0, a) * cs.dlam2(b, c, e));
        }
  const double il = 1.0 / l11;
  return il * term1 - il * il * term2 - il * term3;
}

PivotKind pivot_kind_from_string(const std::string& s) {
  if (s == "signed-root") return PivotKind::signed_root;
  if (s == "wald-obs") return PivotKind::wald_obs;
  if (s == "wald-exp") return PivotKind::wald_exp;
  if (s == "score-obs") return PivotKind::score_obs;
  if (s == "score-exp") return PivotKind::score_exp;
  if (s == "adj-signed-root") return PivotKind::adj_signed_root;
  if (s == "adj-wald") return PivotKind::adj_wald;
  if (s == "adj-score") return PivotKind::adj_score;
  throw ConfigError("unknown pivot kind '" + s + "'");
}

std::string to_string(PivotKind k) {
  switch (k) {
    case PivotKind::signed_root: return "signed-root";
    case PivotKind::wald_obs: return "wald-obs";
    case PivotKind::wald_exp: return "wald-exp";
    case PivotKind::score_obs: return "score-obs";
    case PivotKind::score_exp: return "score-exp";
    case PivotKind::adj_signed_root: return "adj-signed-root";
    case PivotKind::adj_wald: return "adj-wald";
    case PivotKind::adj_score: return "adj-score";
  }
  return "?";
}

PivotCumulants pivot_cumulants(const AdjustmentReport& rep, PivotKind kind) {
  PivotCumulants pc;
  pc.kind = kind;
  const double gi = rep.g_inf, gn = rep.g_np, dd = rep.d_quant;
  switch (kind) {
    case PivotKind::signed_root:
      pc.kappa1 = -(gi + gn);
      pc.kappa3 = 0.0;
      break;
    case PivotKind::wald_obs:
    case PivotKind::wald_exp:
      pc.kappa1 = -(gi + gn + dd);
      pc.kappa3 = -6.0 * dd;
      break;
    case PivotKind::score_obs:
    case PivotKind::score_exp:
      pc.kappa1 = -(gi + gn - 2.0 * dd);
      pc.kappa3 = 12.0 * dd;
      break;
    case PivotKind::adj_signed_root:
      pc.kappa1 = -gi;
      pc.kappa3 = 0.0;
      break;
    case PivotKind::adj_wald:
      pc.kappa1 = -(gi + dd);
      pc.kappa3 = -6.0 * dd;
      break;
    case PivotKind::adj_score:
      pc.kappa1 = -(gi - 2.0 * dd);
      pc.kappa3 = 12.0 * dd;
      break;
  }
  return pc;
}

double cornish_fisher(double t, const PivotCumulants& pc) {
  return t - pc.kappa3 * t * t / 6.0 - pc.kappa1 + pc.kappa3 / 6.0;
}

double mle_mean_expansion(const AdjustmentReport& rep) {
  return -(2.0 * rep.g_inf + rep.g_np - rep.d_quant) / std::sqrt(rep.eta);
}

double profile_score_mean(const AdjustmentReport& rep) {
  return -std::sqrt(rep.eta) * rep.g_np;
}

}  // namespace sra
