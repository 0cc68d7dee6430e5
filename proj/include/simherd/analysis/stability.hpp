#pragma once

// Equilibrium objective for predator-prey runs. For each tick t >= 1 a
// species contributes 1 / (|P_t - P_{t-1}| + 1e-6) while it is alive and 0
// once extinct; the two contributions are averaged, then averaged over ticks.
// A perfectly flat run with both species alive scores 1e6.

#include <simherd/error.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace simherd::analysis {

inline constexpr double kStabilityEpsilon = 1e-6;

inline double stability_score(const std::vector<double>& sheep, const std::vector<double>& wolves) {
  if (sheep.size() != wolves.size()) {
    throw Error(ErrorKind::invalid_argument, "sheep and wolf series differ in length");
  }
  if (sheep.size() < 2) throw Error(ErrorKind::invalid_argument, "a stability score needs at least two ticks");
  double total = 0;
  for (std::size_t t = 1; t < sheep.size(); ++t) {
    const double es = sheep[t] > 0 ? 1.0 / (std::fabs(sheep[t] - sheep[t - 1]) + kStabilityEpsilon) : 0.0;
    const double ew = wolves[t] > 0 ? 1.0 / (std::fabs(wolves[t] - wolves[t - 1]) + kStabilityEpsilon) : 0.0;
    total += (es + ew) / 2;
  }
  return total / static_cast<double>(sheep.size() - 1);
}

// Scores scheduled-reporter rows of the form [ticks, sheep, wolves].
inline double stability_score_rows(const std::vector<std::vector<std::string>>& rows, std::size_t sheep_col = 1,
                                   std::size_t wolves_col = 2) {
  std::vector<double> sheep, wolves;
  sheep.reserve(rows.size());
  wolves.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() <= std::max(sheep_col, wolves_col)) {
      throw Error(ErrorKind::invalid_argument, "reporter row is too short for a stability score");
    }
    try {
      sheep.push_back(std::stod(row[sheep_col]));
      wolves.push_back(std::stod(row[wolves_col]));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::invalid_argument, "non-numeric population value \"" + row[sheep_col] + "\"");
    }
  }
  // A run that stops at tick 0 has no derivative; treat it as fully unstable.
  if (sheep.size() < 2) return 0.0;
  return stability_score(sheep, wolves);
}

}  // namespace simherd::analysis
