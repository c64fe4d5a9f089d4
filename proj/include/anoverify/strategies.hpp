#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "anoverify/belief.hpp"
#include "anoverify/channels.hpp"
#include "anoverify/divergence.hpp"
#include "anoverify/rng.hpp"

namespace anoverify {

enum class StrategyKind { Ors, Das, RoundRobin };

// Experiment selection rule. ORS samples components from fixed weights
// (open-loop, randomized); DAS deterministically probes the component with
// the least Z_{n-1}(j) - log rho~1(j); RoundRobin cycles 1..M and is a
// baseline outside the analyzed pair.
struct SelectionStrategy {
  StrategyKind kind;
  std::vector<double> weights;  // ORS only

  static SelectionStrategy ors(std::vector<double> w) {
    double sum = 0.0;
    for (double v : w) {
      if (v < 0.0) throw std::invalid_argument("ors: negative weight");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("ors: weights must sum to 1");
    return {StrategyKind::Ors, std::move(w)};
  }
  static SelectionStrategy das() { return {StrategyKind::Das, {}}; }
  static SelectionStrategy round_robin() { return {StrategyKind::RoundRobin, {}}; }
};

enum class Verdict { Safe, Unsafe };

// Inference rule applied to the final confidence. Threshold declares safe
// iff C >= theta (boundary inclusive); AlwaysSafe is the trivial feasible
// rule.
struct InferenceRule {
  bool always_safe = false;
  double theta = 0.0;

  static InferenceRule threshold(double t) {
    if (std::isnan(t)) throw std::invalid_argument("threshold: theta must not be NaN");
    return {false, t};
  }
  static InferenceRule always() { return {true, 0.0}; }
};

// Picks the next component to probe. DAS and RoundRobin never consume
// randomness.
inline std::size_t select(const SelectionStrategy& strategy, const TrajectoryState& state,
                          const SystemModel& model, Rng& rng) {
  const std::size_t m = model.component_count();
  switch (strategy.kind) {
    case StrategyKind::Ors:
      return rng.categorical(strategy.weights) + 1;
    case StrategyKind::Das: {
      const std::vector<double>& rho = model.anomaly_prior();
      std::size_t best = 1;
      double best_score = state.z[0] - std::log(rho[0]);
      for (std::size_t j = 2; j <= m; ++j) {
        double score = state.z[j - 1] - std::log(rho[j - 1]);
        if (score < best_score) {  // ties keep the lowest index
          best_score = score;
          best = j;
        }
      }
      return best;
    }
    case StrategyKind::RoundRobin:
      return (state.n % m) + 1;
  }
  throw std::logic_error("select: unknown strategy kind");
}

// zeta_n(j) = Z_n(j) - log rho~1(j) - Zbar_n - H(beta*, rho~1); its
// beta*-weighted mean is always zero and its argmin matches DAS.
inline std::vector<double> zeta(const TrajectoryState& state, const SystemModel& model,
                                const MaxMinSolution& solution) {
  const std::vector<double>& rho = model.anomaly_prior();
  double h = cross_entropy(solution.beta_star, rho);
  std::vector<double> out(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j)
    out[j] = state.z[j] - std::log(rho[j]) - state.z_bar - h;
  return out;
}

inline Verdict infer(const InferenceRule& rule, double confidence) {
  if (rule.always_safe) return Verdict::Safe;
  return confidence >= rule.theta ? Verdict::Safe : Verdict::Unsafe;
}

inline const char* strategy_name(const SelectionStrategy& s) {
  switch (s.kind) {
    case StrategyKind::Ors: return "ors";
    case StrategyKind::Das: return "das";
    case StrategyKind::RoundRobin: return "round_robin";
  }
  return "?";
}

}  // namespace anoverify
