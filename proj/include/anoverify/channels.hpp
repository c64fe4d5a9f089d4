#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "anoverify/rng.hpp"

namespace anoverify {

// A pmf over a finite observation alphabet. Entries must be strictly
// positive so every log-likelihood ratio stays finite.
class DiscreteDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  DiscreteDistribution() = default;

  explicit DiscreteDistribution(std::vector<double> probs, bool normalize = false)
      : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("distribution: empty pmf");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p > 0.0)) throw std::invalid_argument("distribution: entries must be > 0");
      sum += p;
    }
    if (normalize) {
      for (double& p : probs_) p /= sum;
    } else if (std::abs(sum - 1.0) > kSumTolerance) {
      throw std::invalid_argument("distribution: pmf sums to " + std::to_string(sum) +
                                  ", expected 1 (set normalize to renormalize)");
    }
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t y) const { return probs_[y]; }
  double at(std::size_t y) const {
    if (y >= probs_.size()) throw std::out_of_range("distribution: symbol out of range");
    return probs_[y];
  }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const DiscreteDistribution& other) const { return probs_ == other.probs_; }

 private:
  std::vector<double> probs_;
};

// KL divergence D(p||q) in nats.
inline double kl(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl: alphabet size mismatch");
  double d = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) d += p[y] * std::log(p[y] / q[y]);
  return d;
}

// Cross-entropy H(p,q) = -sum p(i) log q(i); accepts any weight vectors of
// equal length with q strictly positive.
inline double cross_entropy(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("cross_entropy: length mismatch");
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q[i] > 0.0)) throw std::domain_error("cross_entropy: q has a zero entry");
    h -= p[i] * std::log(q[i]);
  }
  return h;
}

inline double cross_entropy(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  return cross_entropy(p.probs(), q.probs());
}

// Observation channel of one component: law under "not anomalous" (p0) and
// under "anomalous" (p1) on a shared alphabet.
struct ComponentChannel {
  DiscreteDistribution p0;
  DiscreteDistribution p1;

  ComponentChannel(DiscreteDistribution p0_in, DiscreteDistribution p1_in)
      : p0(std::move(p0_in)), p1(std::move(p1_in)) {
    if (p0.size() != p1.size())
      throw std::invalid_argument("channel: p0 and p1 alphabet sizes differ");
  }

  std::size_t alphabet_size() const { return p0.size(); }
  double divergence() const { return kl(p0, p1); }
};

// The full system: M components, their channels, and the prior over
// hypotheses {0..M} (0 = safe, j >= 1 = component j anomalous).
class SystemModel {
 public:
  SystemModel(std::vector<ComponentChannel> channels, std::vector<double> prior,
              bool normalize_prior = false)
      : channels_(std::move(channels)), prior_(std::move(prior)) {
    if (channels_.empty()) throw std::invalid_argument("model: needs at least one component");
    if (prior_.size() != channels_.size() + 1)
      throw std::invalid_argument("model: prior must have M+1 entries");
    double sum = 0.0;
    for (double p : prior_) sum += p;
    if (normalize_prior) {
      for (double& p : prior_) p /= sum;
    } else if (std::abs(sum - 1.0) > DiscreteDistribution::kSumTolerance) {
      throw std::invalid_argument("model: prior sums to " + std::to_string(sum));
    }
    if (!(prior_[0] > 0.0) || !(prior_[0] < 1.0))
      throw std::invalid_argument("model: prior(0) must lie in (0,1)");
    for (std::size_t j = 1; j < prior_.size(); ++j)
      if (!(prior_[j] > 0.0))
        throw std::invalid_argument("model: prior(" + std::to_string(j) + ") must be > 0");
    anomaly_prior_.resize(channels_.size());
    for (std::size_t j = 0; j < channels_.size(); ++j)
      anomaly_prior_[j] = prior_[j + 1] / (1.0 - prior_[0]);
  }

  std::size_t component_count() const { return channels_.size(); }
  const ComponentChannel& channel(std::size_t u) const {
    if (u < 1 || u > channels_.size()) throw std::out_of_range("model: component index");
    return channels_[u - 1];
  }
  const std::vector<ComponentChannel>& channels() const { return channels_; }
  const std::vector<double>& prior() const { return prior_; }
  // Conditional prior over which component is anomalous, given X != 0.
  const std::vector<double>& anomaly_prior() const { return anomaly_prior_; }

 private:
  std::vector<ComponentChannel> channels_;
  std::vector<double> prior_;
  std::vector<double> anomaly_prior_;
};

// Log-likelihood ratio of hypothesis 0 vs hypothesis j for experiment u and
// observation y: log(p0^u(y)/p1^u(y)) when u = j, otherwise 0.
inline double llr(const SystemModel& model, std::size_t u, std::size_t j, std::size_t y) {
  const ComponentChannel& ch = model.channel(u);
  if (j < 1 || j > model.component_count()) throw std::out_of_range("llr: hypothesis index");
  if (u != j) {
    if (y >= ch.alphabet_size()) throw std::out_of_range("llr: symbol out of range");
    return 0.0;
  }
  return std::log(ch.p0.at(y) / ch.p1.at(y));
}

// Draws one observation for probing component u under hypothesis x.
inline std::size_t sample_observation(const SystemModel& model, std::size_t x, std::size_t u,
                                      Rng& rng) {
  if (x > model.component_count()) throw std::out_of_range("sample_observation: hypothesis");
  const ComponentChannel& ch = model.channel(u);
  const DiscreteDistribution& law = (x == u) ? ch.p1 : ch.p0;
  return rng.categorical(law.probs());
}

// True iff all channels store identical (p0, p1) pairs. Exact equality by
// convention: models are user-authored configs and a tolerance would silently
// change which bounds apply.
inline bool is_homogeneous(const SystemModel& model) {
  const ComponentChannel& first = model.channels().front();
  for (const ComponentChannel& ch : model.channels())
    if (!(ch.p0 == first.p0 && ch.p1 == first.p1)) return false;
  return true;
}

}  // namespace anoverify
