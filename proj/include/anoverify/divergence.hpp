#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anoverify/channels.hpp"

namespace anoverify {

// Saddle point of the max-min divergence game: value d* and the optimizing
// distributions over components.
struct MaxMinSolution {
  double d_star = 0.0;
  std::vector<double> alpha_star;
  std::vector<double> beta_star;
};

// D_u^u = KL(p0^u || p1^u) for each component. Any zero divergence makes the
// component useless and the model degenerate.
inline std::vector<double> per_component_divergence(const SystemModel& model) {
  std::vector<double> d(model.component_count());
  for (std::size_t u = 1; u <= model.component_count(); ++u) {
    d[u - 1] = model.channel(u).divergence();
    if (!(d[u - 1] > 0.0))
      throw std::invalid_argument("degenerate model: component " + std::to_string(u) +
                                  " has zero divergence (p0 == p1)");
  }
  return d;
}

// Closed form: d* = (sum_u 1/D_u^u)^-1 with alpha*(u) = beta*(u) = d*/D_u^u.
// The off-diagonal divergences vanish in this problem, which is what makes
// the general saddle-point computation unnecessary.
inline MaxMinSolution max_min_divergence(const SystemModel& model) {
  std::vector<double> d = per_component_divergence(model);
  double inv_sum = 0.0;
  for (double v : d) inv_sum += 1.0 / v;
  MaxMinSolution sol;
  sol.d_star = 1.0 / inv_sum;
  sol.alpha_star.resize(d.size());
  for (std::size_t u = 0; u < d.size(); ++u) sol.alpha_star[u] = sol.d_star / d[u];
  sol.beta_star = sol.alpha_star;
  return sol;
}

namespace detail {

// Visits every integer composition of `total` into `parts` slots.
inline void for_each_composition(std::size_t parts, long total,
                                 std::vector<long>& counts,
                                 const std::function<void(const std::vector<long>&)>& visit,
                                 std::size_t level = 0) {
  if (level + 1 == parts) {
    counts[level] = total;
    visit(counts);
    return;
  }
  for (long k = 0; k <= total; ++k) {
    counts[level] = k;
    for_each_composition(parts, total - k, counts, visit, level + 1);
  }
}

inline void check_grid_args(std::size_t m, double grid_resolution, const char* who) {
  if (m > 4) throw std::invalid_argument(std::string(who) + ": supports M <= 4 only");
  if (!(grid_resolution > 0.0) || grid_resolution > 0.1)
    throw std::invalid_argument(std::string(who) + ": resolution must be in (0, 0.1]");
}

}  // namespace detail

// Grid-search oracle for max_alpha min_j sum_u alpha(u) D_j^u over the
// simplex, using D_j^u = 0 off the diagonal. Test oracle only; the closed
// form is the production path. Ties resolve to the first point found.
inline std::pair<double, std::vector<double>> brute_force_maxmin(const SystemModel& model,
                                                                 double grid_resolution) {
  const std::size_t m = model.component_count();
  detail::check_grid_args(m, grid_resolution, "brute_force_maxmin");
  std::vector<double> d = per_component_divergence(model);
  const long steps = std::lround(1.0 / grid_resolution);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<long> counts(m, 0), best_counts(m, 0);
  detail::for_each_composition(m, steps, counts, [&](const std::vector<long>& c) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j)
      worst = std::min(worst, (static_cast<double>(c[j]) / steps) * d[j]);
    if (worst > best) {
      best = worst;
      best_counts = c;
    }
  });

  std::vector<double> alpha(m);
  for (std::size_t j = 0; j < m; ++j)
    alpha[j] = static_cast<double>(best_counts[j]) / static_cast<double>(steps);
  return {best, alpha};
}

// Grid-search oracle for the dual min_beta max_u sum_j beta(j) D_j^u, which
// reduces to min_beta max_u beta(u) D_u^u for this divergence structure.
inline double brute_force_minmax(const SystemModel& model, double grid_resolution) {
  const std::size_t m = model.component_count();
  detail::check_grid_args(m, grid_resolution, "brute_force_minmax");
  std::vector<double> d = per_component_divergence(model);
  const long steps = std::lround(1.0 / grid_resolution);

  double best = std::numeric_limits<double>::infinity();
  std::vector<long> counts(m, 0);
  detail::for_each_composition(m, steps, counts, [&](const std::vector<long>& c) {
    double worst = 0.0;
    for (std::size_t u = 0; u < m; ++u)
      worst = std::max(worst, (static_cast<double>(c[u]) / steps) * d[u]);
    best = std::min(best, worst);
  });
  return best;
}

}  // namespace anoverify
