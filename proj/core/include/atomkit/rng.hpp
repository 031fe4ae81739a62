#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "atomkit/dense.hpp"

namespace atomkit {

/// Deterministic random source. Derives doubles from raw mt19937_64 output so
/// that streams are reproducible independent of the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  /// Uniform integer in [0, n).
  int index(int n) {
    return static_cast<int>(gen_() % static_cast<uint64_t>(n));
  }

  Dense normal_dense(Shape s) {
    Dense x(s);
    for (int k = 0; k < x.size(); ++k) x[k] = normal();
    return x;
  }

  Dense uniform_dense(Shape s, double lo, double hi) {
    Dense x(s);
    for (int k = 0; k < x.size(); ++k) x[k] = uniform(lo, hi);
    return x;
  }

  /// k distinct indices from [0, n), ascending.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + index(n - i);
      std::swap(pool[i], pool[j]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
  }

  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace atomkit
