#pragma once

// Saltelli cross-sampling and first/total-order Sobol' index estimation.
//
// Sample layout: for each of the N base points j the block is
//   A_j, AB_j^(1..D), BA_j^(1..D), B_j
// where AB_j^(i) is A_j with coordinate i taken from B_j and BA_j^(i) the
// converse, i.e. N * (2D + 2) rows. The BA rows are only needed for
// second-order indices, which are not estimated, but keeping them makes the
// evaluation count match the usual Saltelli designs.
//
// Estimators (Saltelli 2010 first order, Jansen total order), with V the
// variance of all A and B outputs:
//   S1_i = mean_j[ f(B_j) * (f(AB_j^i) - f(A_j)) ] / V
//   ST_i = mean_j[ (f(A_j) - f(AB_j^i))^2 ] / (2V)

#include <simherd/analysis/sobol_sequence.hpp>
#include <simherd/error.hpp>
#include <simherd/prng.hpp>

#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace simherd::analysis {

struct Bounds {
  double lo = 0;
  double hi = 1;
};

struct SobolProblem {
  std::vector<std::string> names;
  std::vector<Bounds> bounds;

  std::size_t num_vars() const { return names.size(); }

  void validate() const {
    if (names.empty()) throw Error(ErrorKind::invalid_argument, "problem has no variables");
    if (names.size() != bounds.size()) {
      throw Error(ErrorKind::invalid_argument, "problem has " + std::to_string(names.size()) + " names but " +
                                                   std::to_string(bounds.size()) + " bounds");
    }
    if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
      throw Error(ErrorKind::invalid_argument, "problem variable names must be unique");
    }
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      if (!(bounds[i].lo < bounds[i].hi) || !std::isfinite(bounds[i].lo) || !std::isfinite(bounds[i].hi)) {
        throw Error(ErrorKind::invalid_argument, "bounds of " + names[i] + " must satisfy lo < hi");
      }
    }
  }
};

enum class BaseSequence { sobol, uniform };

using Matrix = std::vector<std::vector<double>>;

inline std::size_t saltelli_block_size(std::size_t num_vars) { return 2 * num_vars + 2; }

inline Matrix saltelli_sample(const SobolProblem& problem, std::size_t n, std::uint64_t seed = 0,
                              BaseSequence base = BaseSequence::sobol) {
  problem.validate();
  if (n < 1) throw Error(ErrorKind::invalid_argument, "sample size N must be at least 1");
  const std::size_t d = problem.num_vars();
  if (base == BaseSequence::sobol && 2 * d > detail::kMaxSobolDimension) {
    throw Error(ErrorKind::invalid_argument, "too many variables for the Sobol' base sequence");
  }
  auto scale = [&](std::vector<double> unit) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto& b = problem.bounds[i];
      unit[i] = b.lo + unit[i] * (b.hi - b.lo);
    }
    return unit;
  };

  SobolSequence sobol(base == BaseSequence::sobol ? 2 * d : 1, seed);
  Prng rng(seed);
  Matrix rows;
  rows.reserve(n * saltelli_block_size(d));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> point;
    if (base == BaseSequence::sobol) {
      point = sobol.next();
    } else {
      point.resize(2 * d);
      for (auto& x : point) x = rng.uniform01();
    }
    const auto a = scale({point.begin(), point.begin() + static_cast<std::ptrdiff_t>(d)});
    const auto b = scale({point.begin() + static_cast<std::ptrdiff_t>(d), point.end()});
    rows.push_back(a);
    for (std::size_t i = 0; i < d; ++i) {
      auto ab = a;
      ab[i] = b[i];
      rows.push_back(std::move(ab));
    }
    for (std::size_t i = 0; i < d; ++i) {
      auto ba = b;
      ba[i] = a[i];
      rows.push_back(std::move(ba));
    }
    rows.push_back(b);
  }
  return rows;
}

struct SensitivityResult {
  std::vector<double> s1;
  std::vector<double> st;
  // |S1_i| for every variable, then the remainder 1 - sum |S1_i|.
  std::vector<double> s1_with_interactions;
  // ST scaled to sum to one.
  std::vector<double> st_relative;
};

inline SensitivityResult sobol_analyze(const SobolProblem& problem, const std::vector<double>& y) {
  problem.validate();
  const std::size_t d = problem.num_vars();
  const std::size_t block = saltelli_block_size(d);
  if (y.empty() || y.size() % block != 0) {
    throw Error(ErrorKind::invalid_argument, "output count " + std::to_string(y.size()) +
                                                 " is not a positive multiple of 2D+2 = " + std::to_string(block));
  }
  const std::size_t n = y.size() / block;
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "model outputs must be finite");
  }

  // Centre on the A/B mean first: the estimators are shift-sensitive in
  // finite samples and centring removes that source of noise.
  double mean = 0;
  for (std::size_t j = 0; j < n; ++j) mean += y[j * block] + y[j * block + block - 1];
  mean /= static_cast<double>(2 * n);
  double variance = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = y[j * block] - mean;
    const double b = y[j * block + block - 1] - mean;
    variance += a * a + b * b;
  }
  variance /= static_cast<double>(2 * n);
  if (!(variance > 0)) throw Error(ErrorKind::degenerate, "model output has zero variance");

  SensitivityResult result;
  result.s1.assign(d, 0);
  result.st.assign(d, 0);
  for (std::size_t j = 0; j < n; ++j) {
    const double fa = y[j * block] - mean;
    const double fb = y[j * block + block - 1] - mean;
    for (std::size_t i = 0; i < d; ++i) {
      const double fab = y[j * block + 1 + i] - mean;
      result.s1[i] += fb * (fab - fa);
      result.st[i] += (fa - fab) * (fa - fab);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    result.s1[i] /= static_cast<double>(n) * variance;
    result.st[i] /= 2.0 * static_cast<double>(n) * variance;
  }

  double abs_sum = 0;
  for (double s : result.s1) {
    result.s1_with_interactions.push_back(std::fabs(s));
    abs_sum += std::fabs(s);
  }
  result.s1_with_interactions.push_back(1.0 - abs_sum);

  const double st_sum = std::accumulate(result.st.begin(), result.st.end(), 0.0);
  if (!(st_sum > 0)) throw Error(ErrorKind::degenerate, "total-order indices sum to zero");
  for (double s : result.st) result.st_relative.push_back(s / st_sum);
  return result;
}

}  // namespace simherd::analysis
