#pragma once

// Acceptance checks shared by the test suite and the CLI "check" command.

#include <functional>
#include <string>
#include <vector>

namespace fbmfg {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Criterion ids, 1 through 11.
std::vector<int> criterion_ids();
std::string criterion_name(int id);

/// Runs one criterion. Exceptions are reported as a failure with the message.
CriterionResult run_criterion(int id);

/// "PASS [id] name: detail" or "FAIL ...".
std::string format_result(const CriterionResult& r);

/// Reference best-gamma iteration counts of CP, DR, DFB0, DFB1 on the
/// power-entropy problem at N = 60, alpha = 1.5.
struct TableRow {
  double nu;
  double epsilon;
  int cp, dr, dfb0, dfb1;
};
const std::vector<TableRow>& comparison_table_rows();

}  // namespace fbmfg
