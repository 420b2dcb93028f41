// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace whatif {

struct NelderMeadOptions {
  int max_evaluations = 50000;
  double f_tolerance = 1e-13;  // relative spread of simplex values
  double x_tolerance = 1e-10;  // simplex diameter
  double initial_step = 0.1;
  int restarts = 2;            // re-seed the simplex at the optimum this many times
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Infinite objective values mark infeasible
/// points. `steps` gives a per-coordinate initial simplex scale.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                                    Eigen::VectorXd start, const Eigen::VectorXd& steps,
                                    const NelderMeadOptions& options = {}) {
  const auto n = start.size();
  NelderMeadResult result;
  result.x = start;
  result.value = objective(start);
  result.evaluations = 1;
  if (n == 0) {
    result.converged = true;
    return result;
  }

  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), result.x);
    std::vector<double> values(static_cast<std::size_t>(n + 1), result.value);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& v = simplex[static_cast<std::size_t>(i + 1)];
      v[i] += steps[i];
      values[static_cast<std::size_t>(i + 1)] = objective(v);
      ++result.evaluations;
    }

    bool converged = false;
    std::vector<std::size_t> order(simplex.size());
    while (result.evaluations < options.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
      const auto best = order.front(), worst = order.back(), second = order[order.size() - 2];

      double diameter = 0.0;
      for (const auto& v : simplex) diameter = std::max(diameter, (v - simplex[best]).lpNorm<Eigen::Infinity>());
      const double spread = values[worst] - values[best];
      if (std::isfinite(values[worst]) &&
          spread <= options.f_tolerance * (std::abs(values[best]) + 1e-300) + 1e-300 &&
          diameter <= options.x_tolerance * (1.0 + simplex[best].lpNorm<Eigen::Infinity>())) {
        converged = true;
        break;
      }
      if (diameter <= 1e-15 * (1.0 + simplex[best].lpNorm<Eigen::Infinity>())) {
        converged = std::isfinite(values[best]);
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (auto i : order)
        if (i != worst) centroid += simplex[i];
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
      const double f_reflected = objective(reflected);
      ++result.evaluations;

      if (f_reflected < values[best]) {
        const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
        const double f_expanded = objective(expanded);
        ++result.evaluations;
        if (f_expanded < f_reflected) {
          simplex[worst] = expanded;
          values[worst] = f_expanded;
        } else {
          simplex[worst] = reflected;
          values[worst] = f_reflected;
        }
        continue;
      }
      if (f_reflected < values[second]) {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
        continue;
      }
      const bool outside = f_reflected < values[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double f_contracted = objective(contracted);
      ++result.evaluations;
      if (f_contracted < (outside ? f_reflected : values[worst])) {
        simplex[worst] = contracted;
        values[worst] = f_contracted;
        continue;
      }
      for (auto i : order) {
        if (i == best) continue;
        simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
        values[i] = objective(simplex[i]);
        ++result.evaluations;
      }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best_index = static_cast<std::size_t>(best_it - values.begin());
    if (*best_it <= result.value) {
      result.value = *best_it;
      result.x = simplex[best_index];
    }
    result.converged = converged;
    if (!converged) break;
  }
  return result;
}

}  // namespace whatif
