#include "sra/tables.hpp"

#include <cmath>

#include "sra/adjustments.hpp"
#include "sra/errors.hpp"
#include "sra/geometry.hpp"
#include "sra/models.hpp"

namespace sra {

namespace {

constexpr double kT0 = 0.5;
constexpr double kPsiCaseB = 1.0 / 30.0;

// Common nuisance rate of table 1 case (b): (q-1) exp(-phi t0) = q psi / 2,
// solved by bisection on (0, 50].
double solve_common_rate(int q, double psi) {
  const double target = static_cast<double>(q) * psi / 2.0;
  auto f = [&](double phi) {
    return static_cast<double>(q - 1) * std::exp(-phi * kT0) - target;
  };
  double lo = 1e-12, hi = 50.0;
  if (f(lo) < 0.0 || f(hi) > 0.0) {
    throw NumericError("table 1(b): common-rate equation has no root in (0, 50]");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TableCaseResult table_case(const TableCase& tc) {
  if (tc.table_id != 1 && tc.table_id != 2) {
    throw ConfigError("table_case: table_id must be 1 or 2");
  }
  if (tc.case_label != "a" && tc.case_label != "b") {
    throw ConfigError("table_case: case must be 'a' or 'b'");
  }
  const int q = tc.q;
  if (q < 1 || (tc.table_id == 1 && q < 2)) {
    throw ConfigError("table_case: q too small for this table");
  }

  TableCaseResult out;
  if (tc.table_id == 1) {
    Eigen::VectorXd rates(q);
    if (tc.case_label == "a") {
      rates.setOnes();
    } else {
      const double phi_q = -std::log(static_cast<double>(q) * kPsiCaseB / 2.0) / kT0;
      if (!(phi_q > 0.0)) {
        throw NumericError("table 1(b): phi_q not positive for q = " +
                           std::to_string(q));
      }
      const double phi_common = solve_common_rate(q, kPsiCaseB);
      rates.setConstant(phi_common);
      rates(q - 1) = phi_q;
    }
    out.model = make_multi_exp(1, q, kT0, rates);
  } else {
    Eigen::VectorXd mu(q);
    for (int j = 0; j < q; ++j) {
      mu(j) = tc.case_label == "a" ? static_cast<double>(j + 1) : 1.0;
    }
    out.model = make_curved_normal(1, q, 1.0, mu);
  }

  out.theta = out.model->theta0();
  const CumulantSet cs = out.model->cumulants(out.theta, 3);
  const AdjustmentReport rep = adjustment_report(cs, info_geometry(cs.lam2));
  if (!rep.ratio.has_value()) {
    throw NumericError("table_case: ratio undefined (g_inf = 0)");
  }
  out.ratio = *rep.ratio;
  return out;
}

RatioTable ratio_table(int table_id) {
  RatioTable t;
  t.table_id = table_id;
  t.qs = table_id == 1 ? std::vector<int>{2, 5, 10, 20, 50}
                       : std::vector<int>{1, 2, 5, 10, 20, 50};
  for (int q : t.qs) {
    t.row_a.push_back(table_case({table_id, "a", q}).ratio);
    t.row_b.push_back(table_case({table_id, "b", q}).ratio);
  }
  return t;
}

double round2(double x) {
  return std::copysign(std::floor(std::abs(x) * 100.0 + 0.5) / 100.0, x);
}

}  // namespace sra
