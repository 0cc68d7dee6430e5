#pragma once

// Sobol' low-discrepancy points in [0, 1)^d, 32-bit, Gray-code order,
// starting after the all-zero point (the same order boost::random::sobol
// produces). A nonzero seed applies a random digital shift, which keeps the
// net structure while decorrelating repeated studies.

#include <simherd/analysis/joe_kuo.hpp>
#include <simherd/error.hpp>
#include <simherd/prng.hpp>

#include <bit>
#include <cstdint>
#include <vector>

namespace simherd::analysis {

class SobolSequence {
 public:
  static constexpr int kBits = 32;

  explicit SobolSequence(std::size_t dimension, std::uint64_t seed = 0)
      : dimension_(dimension), directions_(dimension), state_(dimension, 0), shift_(dimension, 0) {
    if (dimension == 0 || dimension > detail::kMaxSobolDimension) {
      throw Error(ErrorKind::invalid_argument,
                  "Sobol' dimension must be in [1, " + std::to_string(detail::kMaxSobolDimension) + "]");
    }
    for (std::size_t d = 0; d < dimension; ++d) {
      auto& v = directions_[d];
      if (d == 0) {
        for (int k = 0; k < kBits; ++k) v[k] = std::uint32_t{1} << (kBits - 1 - k);
        continue;
      }
      const auto& entry = detail::kJoeKuo[d - 1];
      const int s = static_cast<int>(entry.degree);
      for (int k = 0; k < s && k < kBits; ++k) v[k] = entry.initial[k] << (kBits - 1 - k);
      for (int k = s; k < kBits; ++k) {
        std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
        for (int i = 1; i < s; ++i) {
          if ((entry.coefficients >> (s - 1 - i)) & 1u) value ^= v[k - i];
        }
        v[k] = value;
      }
    }
    if (seed != 0) {
      Prng rng(seed);
      for (auto& s : shift_) s = static_cast<std::uint32_t>(rng.next() >> 32);
    }
  }

  std::size_t dimension() const { return dimension_; }

  // Next point; throws once 2^32 - 1 points have been drawn.
  std::vector<double> next() {
    if (index_ == UINT32_MAX) throw Error(ErrorKind::range, "Sobol' sequence exhausted");
    const int c = std::countr_one(index_);
    ++index_;
    std::vector<double> point(dimension_);
    for (std::size_t d = 0; d < dimension_; ++d) {
      state_[d] ^= directions_[d][c];
      point[d] = static_cast<double>(state_[d] ^ shift_[d]) / 4294967296.0;
    }
    return point;
  }

  // Raw integer coordinates of the last point (before scaling), for tests.
  const std::vector<std::uint32_t>& raw() const { return state_; }

 private:
  std::size_t dimension_;
  std::vector<std::array<std::uint32_t, kBits>> directions_;
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
  std::uint32_t index_ = 0;
};

}  // namespace simherd::analysis
