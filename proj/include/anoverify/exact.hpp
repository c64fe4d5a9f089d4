#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "anoverify/belief.hpp"
#include "anoverify/channels.hpp"
#include "anoverify/strategies.hpp"

namespace anoverify {

// Exact evaluation of threshold rules on small homogeneous models.
//
// For a binary channel with symmetric log-likelihood ratios the pair
// (Z_n(1), Z_n(2)) lives on an integer lattice, so the final law of the
// confidence under every hypothesis follows from a dense forward recursion
// over lattice states. This gives psi and phi without Monte Carlo error and
// is the reference the simulation estimates are checked against; it is also
// the only way to see phi once it falls below the Monte Carlo floor.

// One achievable confidence value with its probability mass under the safe
// hypothesis and under the anomaly mixture.
struct ConfidenceAtom {
  double c;
  double p_mass;  // under X = 0
  double q_mass;  // under j ~ rho~1
};

struct ExactEvaluation {
  double psi;
  double phi;
};

inline bool exact_supported(const SystemModel& model) {
  if (model.component_count() != 2) return false;
  if (!is_homogeneous(model)) return false;
  const ComponentChannel& ch = model.channel(1);
  if (ch.alphabet_size() != 2) return false;
  double l0 = std::log(ch.p0[0] / ch.p1[0]);
  double l1 = std::log(ch.p0[1] / ch.p1[1]);
  return std::abs(l0 + l1) <= 1e-9 && std::abs(l0) > 0.0;
}

namespace detail {

struct LatticeLaw {
  // grid[(k1+n)*(2n+1) + (k2+n)] = P[Z = gamma*(k1,k2)] after n steps
  std::vector<double> grid;
  std::size_t n;
  double gamma;
};

inline LatticeLaw exact_lattice_law(const SystemModel& model, const SelectionStrategy& strategy,
                                    std::size_t hypothesis, std::size_t n) {
  const ComponentChannel& ch = model.channel(1);
  const double gamma = std::abs(std::log(ch.p0[0] / ch.p1[0]));
  // delta k for observing symbol 0 while probing: +1 if symbol 0 carries
  // positive LLR, else -1
  const int dk0 = std::log(ch.p0[0] / ch.p1[0]) > 0.0 ? 1 : -1;
  const std::size_t size = 2 * n + 1;
  const std::vector<double>& rho = model.anomaly_prior();
  const double log_rho1 = std::log(rho[0]);
  const double log_rho2 = std::log(rho[1]);

  std::vector<double> cur(size * size, 0.0), nxt(size * size, 0.0);
  cur[n * size + n] = 1.0;

  auto p_symbol0 = [&](std::size_t u) {
    return (hypothesis == u) ? ch.p1[0] : ch.p0[0];
  };

  const long ln = static_cast<long>(n);
  const long lsize = static_cast<long>(size);
  for (std::size_t t = 0; t < n; ++t) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    const long reach = static_cast<long>(t);
    for (long k1 = -reach; k1 <= reach; ++k1) {
      for (long k2 = -reach; k2 <= reach; ++k2) {
        const long idx = (k1 + ln) * lsize + (k2 + ln);
        const double mass = cur[static_cast<std::size_t>(idx)];
        if (mass == 0.0) continue;
        double w1;  // probability of probing component 1 this step
        switch (strategy.kind) {
          case StrategyKind::Ors:
            w1 = strategy.weights[0];
            break;
          case StrategyKind::Das:
            w1 = (gamma * static_cast<double>(k1) - log_rho1 <=
                  gamma * static_cast<double>(k2) - log_rho2)
                     ? 1.0
                     : 0.0;
            break;
          case StrategyKind::RoundRobin:
            w1 = (t % 2 == 0) ? 1.0 : 0.0;
            break;
          default:
            throw std::logic_error("exact: unknown strategy");
        }
        if (w1 > 0.0) {
          double p0y = p_symbol0(1);
          nxt[static_cast<std::size_t>(idx + dk0 * lsize)] += mass * w1 * p0y;
          nxt[static_cast<std::size_t>(idx - dk0 * lsize)] += mass * w1 * (1.0 - p0y);
        }
        if (w1 < 1.0) {
          double p0y = p_symbol0(2);
          nxt[static_cast<std::size_t>(idx + dk0)] += mass * (1.0 - w1) * p0y;
          nxt[static_cast<std::size_t>(idx - dk0)] += mass * (1.0 - w1) * (1.0 - p0y);
        }
      }
    }
    std::swap(cur, nxt);
  }
  return {std::move(cur), n, gamma};
}

}  // namespace detail

// Sorted law of the final confidence: for each achievable value, its mass
// under X = 0 and under the rho~1 anomaly mixture.
inline std::vector<ConfidenceAtom> exact_confidence_law(const SystemModel& model,
                                                        const SelectionStrategy& strategy,
                                                        std::size_t n) {
  if (!exact_supported(model))
    throw std::invalid_argument(
        "exact evaluation requires a homogeneous M=2 model with a binary "
        "symmetric-LLR channel");
  if (n < 1 || n > 1024)
    throw std::invalid_argument("exact evaluation supports 1 <= n <= 1024");

  detail::LatticeLaw p0 = detail::exact_lattice_law(model, strategy, 0, n);
  detail::LatticeLaw q1 = detail::exact_lattice_law(model, strategy, 1, n);
  detail::LatticeLaw q2 = detail::exact_lattice_law(model, strategy, 2, n);
  const std::vector<double>& rho = model.anomaly_prior();

  const std::size_t size = 2 * n + 1;
  std::vector<ConfidenceAtom> atoms;
  atoms.reserve(size * size / 2);
  for (long k1 = -static_cast<long>(n); k1 <= static_cast<long>(n); ++k1) {
    for (long k2 = -static_cast<long>(n); k2 <= static_cast<long>(n); ++k2) {
      std::size_t idx = static_cast<std::size_t>(k1 + static_cast<long>(n)) * size +
                        static_cast<std::size_t>(k2 + static_cast<long>(n));
      double pm = p0.grid[idx];
      double qm = rho[0] * q1.grid[idx] + rho[1] * q2.grid[idx];
      if (pm == 0.0 && qm == 0.0) continue;
      double a = std::log(rho[0]) - p0.gamma * static_cast<double>(k1);
      double b = std::log(rho[1]) - p0.gamma * static_cast<double>(k2);
      double mx = std::max(a, b);
      double c = -(mx + std::log(std::exp(a - mx) + std::exp(b - mx)));
      atoms.push_back({c, pm, qm});
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const ConfidenceAtom& a, const ConfidenceAtom& b) { return a.c < b.c; });
  // merge states sharing a confidence value (symmetric lattice points)
  std::vector<ConfidenceAtom> merged;
  merged.reserve(atoms.size());
  for (const ConfidenceAtom& a : atoms) {
    if (!merged.empty() && a.c - merged.back().c <= 1e-11) {
      merged.back().p_mass += a.p_mass;
      merged.back().q_mass += a.q_mass;
    } else {
      merged.push_back(a);
    }
  }
  return merged;
}

// Largest achievable confidence value theta with P_0[C < theta] <= epsilon;
// the threshold rule at theta is then exactly feasible.
inline double exact_calibrate(const std::vector<ConfidenceAtom>& law, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::domain_error("exact_calibrate: epsilon must be in (0,1)");
  double below = 0.0;
  double theta = law.front().c;
  for (const ConfidenceAtom& a : law) {
    if (below <= epsilon) theta = a.c;
    else break;
    below += a.p_mass;
  }
  return theta;
}

// psi and phi of the rule "safe iff C >= theta" evaluated exactly.
inline ExactEvaluation exact_estimate(const std::vector<ConfidenceAtom>& law, double theta) {
  ExactEvaluation out{0.0, 0.0};
  for (const ConfidenceAtom& a : law) {
    if (a.c >= theta) {
      out.psi += a.p_mass;
      out.phi += a.q_mass;
    }
  }
  return out;
}

inline double exact_calibrate(const SystemModel& model, const SelectionStrategy& strategy,
                              std::size_t n, double epsilon) {
  return exact_calibrate(exact_confidence_law(model, strategy, n), epsilon);
}

inline ExactEvaluation exact_estimate(const SystemModel& model, const SelectionStrategy& strategy,
                                      std::size_t n, double theta) {
  return exact_estimate(exact_confidence_law(model, strategy, n), theta);
}

}  // namespace anoverify
