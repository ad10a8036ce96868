#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "nlwave/energy.hpp"
#include "nlwave/errors.hpp"

namespace nlwave {

enum class QMethod { prefix_sum, brute_force };

inline std::string_view to_string(QMethod m) { return m == QMethod::prefix_sum ? "prefix_sum" : "brute_force"; }

struct InteractionReport {
  double t = 0.0;
  double q_value = 0.0;
  QMethod method = QMethod::prefix_sum;
};

/// sum_{i,j} |x_i - x_j| w_i w_j over ordered pairs, O(N^2).
inline double pairwise_brute_force(std::span<const double> x, std::span<const double> w) {
  if (x.size() != w.size()) throw InvalidParams("positions and weights differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) row += std::fabs(x[i] - x[j]) * w[j];
    s += w[i] * row;
  }
  return s;
}

/// Same sum in O(N) after sorting. With positions ascending, the running
/// quantity A_j = sum_{i<j} (x_j - x_i) w_i obeys A_{j+1} = A_j + (x_{j+1} - x_j) S_j,
/// S_j = sum_{i<=j} w_i, so nonnegative weights never cause cancellation.
inline double pairwise_prefix_sum(std::span<const double> x, std::span<const double> w) {
  if (x.size() != w.size()) throw InvalidParams("positions and weights differ in length");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  std::vector<std::size_t> order;
  const bool sorted = std::is_sorted(x.begin(), x.end());
  if (!sorted) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  }
  auto at = [&](std::size_t k) { return sorted ? k : order[k]; };
  double S = w[at(0)];
  double A = 0.0;
  double total = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t j = at(k);
    A += (x[j] - x[at(k - 1)]) * S;
    total += w[j] * A;
    S += w[j];
  }
  return 2.0 * total;
}

/// Q(t) = sum_{i,j} |x_i - x_j| w_i w_j with w_j = e_+(x_j) dx.
inline InteractionReport interaction_q(const EnergyDensities& d, const GridSpec& grid,
                                       QMethod method = QMethod::prefix_sum) {
  const std::size_t n = d.e_plus.size();
  const double dx = grid.dx();
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = d.e_plus[j] * dx;
  const auto xs = grid.nodes();
  const double q = method == QMethod::prefix_sum ? pairwise_prefix_sum(xs, w) : pairwise_brute_force(xs, w);
  return InteractionReport{d.t, q, method};
}

}  // namespace nlwave
