#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace gfnoma {

/// Binomial coefficient C(n, k) as a double. Exact for every value this
/// library needs (n well below the 2^53 integer ceiling).
inline double binomial(int n, int k) {
  if (n < 0 || k < 0) throw std::invalid_argument("binomial needs n, k >= 0");
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int l = 1; l <= k; ++l) r = r * (n - k + l) / l;
  return r;
}

/// Falling factorial n * (n-1) * ... * (n-i+1); equals 1 for i == 0.
inline double falling_factorial(int n, int i) {
  if (i < 0) throw std::invalid_argument("falling_factorial needs i >= 0");
  double r = 1.0;
  for (int t = 0; t < i; ++t) r *= (n - t);
  return r;
}

/// Elementary symmetric polynomial e_i(x_1, ..., x_K): the sum of products of
/// all i-element subsets. Computed by the stable O(K*i) recurrence
/// e_i^(new) = e_i + x * e_{i-1}; returns 0 for i > K and 1 for i == 0.
inline double elementary_symmetric(std::span<const double> values, int degree) {
  if (degree < 0) throw std::invalid_argument("elementary_symmetric needs degree >= 0");
  const int n = static_cast<int>(values.size());
  if (degree > n) return 0.0;
  std::vector<double> e(static_cast<std::size_t>(degree) + 1, 0.0);
  e[0] = 1.0;
  for (int j = 0; j < n; ++j) {
    const double x = values[static_cast<std::size_t>(j)];
    for (int i = std::min(degree, j + 1); i >= 1; --i)
      e[static_cast<std::size_t>(i)] += x * e[static_cast<std::size_t>(i) - 1];
  }
  return e[static_cast<std::size_t>(degree)];
}

/// Probability weight that `count` users, each landing on ladder rung k with
/// the rung's infeasibility probability outage[k] (summed over rungs), all
/// draw infeasible rungs: the multinomial sum over per-user rung choices
/// collapses to (sum_k outage[k])^count.
inline double all_infeasible_weight(std::span<const double> outage, int count) {
  if (count < 0) throw std::invalid_argument("all_infeasible_weight needs count >= 0");
  double s = 0.0;
  for (double pe : outage) s += pe;
  return std::pow(s, count);
}

/// Running compensated (Kahan) sum; keeps enumeration totals accurate to a
/// few ulps even across billions of terms.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace gfnoma
