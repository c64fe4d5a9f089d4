#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anoverify/channels.hpp"
#include "anoverify/divergence.hpp"
#include "anoverify/rng.hpp"

namespace anoverify {

// Raised when an exact convolution would exceed the atom budget; callers
// switch to the Monte Carlo quantile fallback.
struct AtomBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when no s in (0,1) gives a contraction factor below 1.
struct ConstantsUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoundOptions {
  double merge_tol = 1e-12;
  std::size_t atom_cap = 10'000'000;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t mc_seed = 0x5eedb0bd5ull;
};

// Finitely supported real-valued distribution: sorted atoms with positive
// probabilities. Carrier for the law of Zbar_N and its quantiles.
class DiscreteValueDistribution {
 public:
  struct Atom {
    double value;
    double prob;
  };

  DiscreteValueDistribution(std::vector<Atom> atoms, double merge_tol = 1e-12)
      : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("value distribution: no atoms");
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.value < b.value; });
    std::vector<Atom> merged;
    merged.reserve(atoms_.size());
    for (const Atom& a : atoms_) {
      if (!(a.prob > 0.0)) throw std::invalid_argument("value distribution: prob <= 0");
      if (!merged.empty() && a.value - merged.back().value <= merge_tol) {
        Atom& m = merged.back();
        double total = m.prob + a.prob;
        m.value = (m.value * m.prob + a.value * a.prob) / total;
        m.prob = total;
      } else {
        merged.push_back(a);
      }
    }
    atoms_ = std::move(merged);
    double sum = 0.0;
    for (const Atom& a : atoms_) sum += a.prob;
    if (std::abs(sum - 1.0) > 1e-10)
      throw std::invalid_argument("value distribution: probabilities sum to " +
                                  std::to_string(sum));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  double mean() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.value * a.prob;
    return m;
  }

  double central_moment(double center, int order, bool absolute = false) const {
    double m = 0.0;
    for (const Atom& a : atoms_) {
      double d = a.value - center;
      double t = 1.0;
      for (int k = 0; k < order; ++k) t *= d;
      m += a.prob * (absolute ? std::abs(t) : t);
    }
    return m;
  }

  double variance() const { return central_moment(mean(), 2); }

 private:
  std::vector<Atom> atoms_;
};

// Law of the per-step increment L = (1/M) log(p0(Y)/p1(Y)) with Y ~ p0.
// Only defined for homogeneous models; the increment law is then the same
// whichever component is probed, so a single channel determines it.
inline DiscreteValueDistribution l_distribution(const SystemModel& model,
                                                double merge_tol = 1e-12) {
  per_component_divergence(model);  // rejects degenerate channels
  if (!is_homogeneous(model))
    throw std::invalid_argument("l_distribution: requires a homogeneous model");
  const ComponentChannel& ch = model.channel(1);
  const double m = static_cast<double>(model.component_count());
  std::vector<DiscreteValueDistribution::Atom> atoms;
  atoms.reserve(ch.alphabet_size());
  for (std::size_t y = 0; y < ch.alphabet_size(); ++y)
    atoms.push_back({std::log(ch.p0[y] / ch.p1[y]) / m, ch.p0[y]});
  return DiscreteValueDistribution(std::move(atoms), merge_tol);
}

// Exact n-fold convolution with atom merging. Binary channels stay O(n)
// atoms; incommensurable value sets can blow up, hence the cap.
inline DiscreteValueDistribution convolve_n(const DiscreteValueDistribution& dist, std::size_t n,
                                            double merge_tol = 1e-12,
                                            std::size_t atom_cap = 10'000'000) {
  if (n < 1) throw std::invalid_argument("convolve_n: n must be >= 1");
  DiscreteValueDistribution acc = dist;
  for (std::size_t step = 1; step < n; ++step) {
    if (acc.size() * dist.size() > atom_cap)
      throw AtomBudgetExceeded("convolve_n: atom budget exceeded at fold " +
                               std::to_string(step + 1) +
                               "; use the Monte Carlo quantile fallback");
    std::vector<DiscreteValueDistribution::Atom> next;
    next.reserve(acc.size() * dist.size());
    for (const auto& a : acc.atoms())
      for (const auto& b : dist.atoms()) next.push_back({a.value + b.value, a.prob * b.prob});
    acc = DiscreteValueDistribution(std::move(next), merge_tol);
  }
  return acc;
}

// Left-continuous inverse cdf: inf{x : F(x) >= p} + offset.
inline double quantile(const DiscreteValueDistribution& dist, double p, double offset = 0.0) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("quantile: p must be in (0,1)");
  double acc = 0.0;
  for (const auto& a : dist.atoms()) {
    acc += a.prob;
    if (acc >= p) return a.value + offset;
  }
  return dist.atoms().back().value + offset;
}

// D(beta* || rho~1), the constant offset applied to Zbar_N before taking
// quantiles.
inline double prior_offset(const SystemModel& model, const MaxMinSolution& solution) {
  const std::vector<double>& rho = model.anomaly_prior();
  double d = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j)
    d += solution.beta_star[j] * std::log(solution.beta_star[j] / rho[j]);
  return d;
}

namespace detail {

// Empirical quantile of Zbar_n + offset from seeded sampling; fallback for
// channels whose exact convolution exceeds the atom budget.
inline double mc_zbar_quantile(const DiscreteValueDistribution& base, std::size_t n, double p,
                               double offset, const BoundOptions& opts) {
  Rng rng(derive_seed(opts.mc_seed, 0x4d43u /*"MC"*/, n));
  std::vector<double> cdf;
  cdf.reserve(base.size());
  double acc = 0.0;
  for (const auto& a : base.atoms()) {
    acc += a.prob;
    cdf.push_back(acc);
  }
  std::vector<double> sums(opts.mc_samples);
  for (double& s : sums) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double u = rng.uniform();
      std::size_t idx = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
      if (idx >= base.size()) idx = base.size() - 1;
      total += base.atoms()[idx].value;
    }
    s = total;
  }
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sums.size())));
  if (rank == 0) rank = 1;
  std::nth_element(sums.begin(), sums.begin() + (rank - 1), sums.end());
  return sums[rank - 1] + offset;
}

inline double inv_n_quantile(const SystemModel& model, const MaxMinSolution& solution,
                             std::size_t n, double p, const BoundOptions& opts) {
  DiscreteValueDistribution base = l_distribution(model, opts.merge_tol);
  double offset = prior_offset(model, solution);
  try {
    DiscreteValueDistribution zbar = convolve_n(base, n, opts.merge_tol, opts.atom_cap);
    return quantile(zbar, p, offset);
  } catch (const AtomBudgetExceeded&) {
    return mc_zbar_quantile(base, n, p, offset, opts);
  }
}

}  // namespace detail

// Inverse standard normal cdf (Acklam's rational approximation polished by
// one Halley step; absolute error well below 1e-9).
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("inverse_normal_cdf: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the erfc-based cdf.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

// Standard normal cdf and the tail-quantile Q^{-1}.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_tail_quantile(double p) { return -inverse_normal_cdf(p); }

// Weak converse: -(1/N) log phi*_N <= D*/(1-eps) + (log 2 + H(beta*, rho~1))
// / (N (1-eps)), in nats per experiment. Valid for heterogeneous models.
inline double weak_converse_rate(const SystemModel& model, const MaxMinSolution& solution,
                                 std::size_t n, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::domain_error("weak_converse_rate: epsilon must be in (0,1)");
  if (n < 1) throw std::invalid_argument("weak_converse_rate: n must be >= 1");
  double h = cross_entropy(solution.beta_star, model.anomaly_prior());
  return solution.d_star / (1.0 - epsilon) +
         (std::log(2.0) + h) / (static_cast<double>(n) * (1.0 - epsilon));
}

// Strong converse: -log phi*_N <= INV_N(eps + eps/eta) + log(eta/eps),
// where INV_N is the quantile function of Zbar_N + D(beta*||rho~1).
inline double strong_converse(const SystemModel& model, const MaxMinSolution& solution,
                              std::size_t n, double epsilon, double eta,
                              const BoundOptions& opts = {}) {
  if (!(eta > 1.0)) throw std::domain_error("strong_converse: eta must be > 1");
  double arg = epsilon + epsilon / eta;
  if (!(arg > 0.0) || !(arg < 1.0))
    throw std::domain_error("strong_converse: eps + eps/eta must be in (0,1)");
  return detail::inv_n_quantile(model, solution, n, arg, opts) + std::log(eta / epsilon);
}

struct AchievabilityConstants {
  double s_star;
  double varsigma;
  double k;
  double k_prime;
};

// Chernoff machinery for the achievability threshold: minimizes
// varsigma(s) = ((1+delta)/M) m(s) + (1-(1+delta)/M) mbar(s) over s in (0,1)
// by golden section (the map is convex), where m and mbar are the
// safe-hypothesis mgfs of the zeta increments for the probed and unprobed
// component respectively.
inline AchievabilityConstants achievability_constants(const SystemModel& model,
                                                      const MaxMinSolution& solution,
                                                      double delta) {
  (void)solution;
  if (!is_homogeneous(model))
    throw std::invalid_argument("achievability_constants: requires a homogeneous model");
  const double m_count = static_cast<double>(model.component_count());
  if (model.component_count() < 2)
    throw std::invalid_argument("achievability_constants: needs M >= 2");
  if (!(delta >= 0.0) || !(delta < 1.0 / (m_count - 1.0)))
    throw std::domain_error("achievability_constants: delta must lie in [0, 1/(M-1))");

  const ComponentChannel& ch = model.channel(1);
  auto mgf_probed = [&](double s) {
    double v = 0.0;
    for (std::size_t y = 0; y < ch.alphabet_size(); ++y)
      v += ch.p0[y] * std::exp(s * (m_count - 1.0) / m_count * std::log(ch.p1[y] / ch.p0[y]));
    return v;
  };
  auto mgf_other = [&](double s) {
    double v = 0.0;
    for (std::size_t y = 0; y < ch.alphabet_size(); ++y)
      v += ch.p0[y] * std::exp(s / m_count * std::log(ch.p0[y] / ch.p1[y]));
    return v;
  };
  const double w = (1.0 + delta) / m_count;
  auto varsigma = [&](double s) { return w * mgf_probed(s) + (1.0 - w) * mgf_other(s); };

  double lo = 1e-9, hi = 1.0 - 1e-9;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = varsigma(x1), f2 = varsigma(x2);
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = varsigma(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = varsigma(x2);
    }
  }
  double s_star = 0.5 * (lo + hi);
  double vs = varsigma(s_star);
  if (!(vs < 1.0))
    throw ConstantsUnavailable("achievability_constants: no s in (0,1) gives varsigma < 1");
  double k = (1.0 + delta) * (mgf_probed(s_star) + (m_count - 1.0) * mgf_other(s_star)) /
             (1.0 + delta - m_count * delta);
  double k_prime = m_count + k / (1.0 - vs);
  return {s_star, vs, k, k_prime};
}

struct AchievabilityThreshold {
  double theta;
  double theta1;
  double theta2;
  bool constants_ok;
};

// Confidence threshold realizing the achievability bound:
// theta2 = INV_N(eps - eps/eta) handles the Zbar tail, theta1 the
// divergence-term tail via the Chernoff constants. The induced rule has
// phi_N <= exp(-theta) and correct-verification probability >= 1 - eps.
// With M = 1 the divergence term vanishes identically, so theta1 = 0 exact.
inline AchievabilityThreshold achievability_threshold(const SystemModel& model,
                                                      const MaxMinSolution& solution,
                                                      std::size_t n, double epsilon, double eta,
                                                      double delta,
                                                      const BoundOptions& opts = {}) {
  if (!(eta > 1.0)) throw std::domain_error("achievability_threshold: eta must be > 1");
  double arg = epsilon - epsilon / eta;
  if (!(arg > 0.0) || !(arg < 1.0))
    throw std::domain_error("achievability_threshold: eps - eps/eta must be in (0,1)");
  double theta2 = detail::inv_n_quantile(model, solution, n, arg, opts);
  if (model.component_count() == 1) return {theta2, 0.0, theta2, true};
  try {
    AchievabilityConstants c = achievability_constants(model, solution, delta);
    double theta1 = std::log(epsilon / (eta * c.k_prime)) / c.s_star +
                    std::log(static_cast<double>(model.component_count()));
    return {theta1 + theta2, theta1, theta2, true};
  } catch (const ConstantsUnavailable&) {
    return {theta2, 0.0, theta2, false};
  }
}

struct BerryEsseenBounds {
  double upper;  // main term of the converse side
  double lower;  // main term of the achievability side
  double v;
  double t;
  bool upper_defined;
  bool lower_defined;
};

// Normal-approximation brackets of the quantile bounds: main terms
// N D* -/+ sqrt(N V) Q^{-1}(eps +/- eps/eta +/- 6T/sqrt(N V^3)); the
// O(log(eta/eps)) corrections are reported separately, never added.
inline BerryEsseenBounds berry_esseen_bounds(const SystemModel& model,
                                             const MaxMinSolution& solution, std::size_t n,
                                             double epsilon, double eta,
                                             const BoundOptions& opts = {}) {
  if (!(eta > 1.0)) throw std::domain_error("berry_esseen_bounds: eta must be > 1");
  DiscreteValueDistribution base = l_distribution(model, opts.merge_tol);
  const double d_star = solution.d_star;
  const double v = base.central_moment(d_star, 2);
  const double t = base.central_moment(d_star, 3, /*absolute=*/true);
  const double nd = static_cast<double>(n);
  const double be = 6.0 * t / std::sqrt(nd * v * v * v);

  BerryEsseenBounds out{std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), v, t, false, false};
  double arg_up = epsilon + epsilon / eta + be;
  if (arg_up > 0.0 && arg_up < 1.0) {
    out.upper = nd * d_star - std::sqrt(nd * v) * normal_tail_quantile(arg_up);
    out.upper_defined = true;
  }
  double arg_lo = epsilon - epsilon / eta - be;
  if (arg_lo > 0.0 && arg_lo < 1.0) {
    out.lower = nd * d_star - std::sqrt(nd * v) * normal_tail_quantile(arg_lo);
    out.lower_defined = true;
  }
  return out;
}

// One row of the `bounds` output: every bound the library evaluates for a
// given (n, epsilon, eta).
struct BoundReport {
  std::size_t n = 0;
  double epsilon = 0.0;
  double eta = 0.0;
  double weak_rate = 0.0;
  double strong_converse = 0.0;
  double achievability_theta = 0.0;
  double be_upper_main = 0.0;
  double be_lower_main = 0.0;
  double log_term = 0.0;
  double v = 0.0;
  double t = 0.0;
  bool be_upper_defined = false;
  bool be_lower_defined = false;
  bool achievability_constants_ok = false;
};

inline BoundReport evaluate_bounds(const SystemModel& model, const MaxMinSolution& solution,
                                   std::size_t n, double epsilon, double eta, double delta,
                                   const BoundOptions& opts = {}) {
  BoundReport r;
  r.n = n;
  r.epsilon = epsilon;
  r.eta = eta;
  r.weak_rate = weak_converse_rate(model, solution, n, epsilon);
  r.strong_converse = strong_converse(model, solution, n, epsilon, eta, opts);
  AchievabilityThreshold at = achievability_threshold(model, solution, n, epsilon, eta, delta, opts);
  r.achievability_theta = at.theta;
  r.achievability_constants_ok = at.constants_ok;
  BerryEsseenBounds be = berry_esseen_bounds(model, solution, n, epsilon, eta, opts);
  r.be_upper_main = be.upper;
  r.be_lower_main = be.lower;
  r.be_upper_defined = be.upper_defined;
  r.be_lower_defined = be.lower_defined;
  r.v = be.v;
  r.t = be.t;
  r.log_term = std::log(eta / epsilon);
  return r;
}

// Default delta for the Chernoff constants when the caller does not pick
// one: halfway into the admissible interval.
inline double default_delta(const SystemModel& model) {
  double m = static_cast<double>(model.component_count());
  if (m < 2.0) return 0.0;
  return 1.0 / (2.0 * (m - 1.0));
}

}  // namespace anoverify
