#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "anoverify/channels.hpp"
#include "anoverify/divergence.hpp"

namespace anoverify {

// Per-trajectory sufficient statistics: accumulated log-likelihood ratios
// Z_n(j), their beta*-weighted average Z-bar, and the step count. Z is
// sufficient for the confidence level, so full histories stay out of the
// hot path.
struct TrajectoryState {
  std::size_t n = 0;
  std::vector<double> z;
  double z_bar = 0.0;

  static TrajectoryState zero(std::size_t components) {
    TrajectoryState s;
    s.z.assign(components, 0.0);
    return s;
  }
};

struct Posterior {
  std::vector<double> probs;
};

namespace detail {

// log(sum_j exp(w_j)) with max shift; Z grows linearly in n, so naive
// exponentials overflow near n ~ 700.
inline double log_sum_exp(const std::vector<double>& w) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : w) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : w) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

// Log-weights log(rho~1(j)) - Z_n(j) that drive the confidence level and
// the posterior.
inline std::vector<double> log_weights(const TrajectoryState& state, const SystemModel& model) {
  const std::vector<double>& rho = model.anomaly_prior();
  std::vector<double> w(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) w[j] = std::log(rho[j]) - state.z[j];
  return w;
}

}  // namespace detail

// One experiment step: z(j) += llr(u, j, y) (only j = u moves) and
// z_bar += beta*(u) * llr(u, u, y).
inline TrajectoryState update(const TrajectoryState& state, const SystemModel& model,
                              const MaxMinSolution& solution, std::size_t u, std::size_t y) {
  TrajectoryState next = state;
  double lam = llr(model, u, u, y);
  next.z[u - 1] += lam;
  next.z_bar += solution.beta_star[u - 1] * lam;
  next.n += 1;
  return next;
}

// Confidence level C = -log sum_j rho~1(j) exp(-Z_n(j)), evaluated in the
// log domain.
inline double confidence(const TrajectoryState& state, const SystemModel& model) {
  return -detail::log_sum_exp(detail::log_weights(state, model));
}

// Posterior over which component is anomalous: rho~1(j) e^{-Z_n(j)}
// normalized (max-shifted exponentials).
inline Posterior posterior(const TrajectoryState& state, const SystemModel& model) {
  std::vector<double> w = detail::log_weights(state, model);
  double lse = detail::log_sum_exp(w);
  Posterior post;
  post.probs.resize(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) post.probs[j] = std::exp(w[j] - lse);
  return post;
}

// Splits the confidence into -D(beta*||posterior) plus
// (z_bar + D(beta*||rho~1)); the two must add back to the confidence.
// Both divergences are evaluated from log-weights directly so the split
// stays finite for arbitrarily large Z.
inline std::pair<double, double> decompose(const TrajectoryState& state, const SystemModel& model,
                                           const MaxMinSolution& solution) {
  const std::vector<double>& beta = solution.beta_star;
  const std::vector<double>& rho = model.anomaly_prior();
  std::vector<double> w = detail::log_weights(state, model);
  double lse = detail::log_sum_exp(w);

  double kl_term = 0.0;   // -D(beta* || rho~_{n+1})
  double d_prior = 0.0;   // D(beta* || rho~1)
  for (std::size_t j = 0; j < beta.size(); ++j) {
    double log_post = w[j] - lse;
    kl_term -= beta[j] * (std::log(beta[j]) - log_post);
    d_prior += beta[j] * (std::log(beta[j]) - std::log(rho[j]));
  }
  return {kl_term, state.z_bar + d_prior};
}

}  // namespace anoverify
