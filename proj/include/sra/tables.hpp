#pragma once

#include <string>
#include <vector>

#include "sra/model.hpp"

namespace sra {

/// One configuration of the ratio tables: table 1 is the multi-sample
/// exponential model (t0 = 0.5), table 2 the curved normal model.
struct TableCase {
  int table_id = 1;        // 1 or 2
  std::string case_label;  // "a" or "b"
  int q = 2;
};

struct TableCaseResult {
  ModelPtr model;
  Eigen::VectorXd theta;
  double ratio = 0.0;  // g_np / g_inf
};

TableCaseResult table_case(const TableCase& tc);

struct RatioTable {
  int table_id = 1;
  std::vector<int> qs;
  std::vector<double> row_a;
  std::vector<double> row_b;
};

/// Full table over the published column sets {2,5,10,20,50} (table 1) and
/// {1,2,5,10,20,50} (table 2).
RatioTable ratio_table(int table_id);

/// Rounds half away from zero to two decimals (table presentation).
double round2(double x);

}  // namespace sra
