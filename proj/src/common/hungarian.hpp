#pragma once

#include <vector>

namespace intentsim {

// Cost value (and anything above it) marking a pair that must never be matched.
inline constexpr double kUnassignable = 1e12;

// Minimum-cost one-to-one assignment for a dense rows x cols cost matrix
// (row-major). Rows and columns may stay unmatched; leaving a pair unmatched
// is always preferred over using a cost >= kUnassignable. Among assignments
// of maximal cardinality the total cost is minimal.
//
// Returns one column index per row, -1 for unmatched rows.
std::vector<int> solve_assignment(const std::vector<double>& cost, int rows, int cols);

}  // namespace intentsim
