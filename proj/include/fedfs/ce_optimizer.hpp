#pragma once

// Cross-Entropy search over Bernoulli feature masks.
//
// One round draws S masks z ~ Bernoulli(p), scores each with H(y|U(z)),
// takes the elite samples at or below the (1 - beta) percentile gamma and
// moves p toward the elite per-feature frequency:
//
//   p_i <- (1 - alpha) p_i + alpha * (#elite with z_i = 1) / #elite
//
// followed by a clamp to [eps, 1 - eps] so that every mask stays reachable.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fedfs/error.hpp"
#include "fedfs/info_core.hpp"
#include "fedfs/parallel.hpp"
#include "fedfs/random.hpp"

namespace fedfs {

inline constexpr double kDefaultClamp = 1e-6;
inline constexpr double kDefaultSelectionThreshold = 0.99;

/// Vector of independent Bernoulli selection probabilities, one per feature.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  explicit ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
    for (double p : probs_)
      detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
                      "ProbabilityVector: entry outside [0, 1]");
  }
  ProbabilityVector(std::initializer_list<double> probs)
      : ProbabilityVector(std::vector<double>(probs)) {}

  static ProbabilityVector uniform(std::size_t m, double value = 0.5) {
    return ProbabilityVector(std::vector<double>(m, value));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const noexcept { return probs_; }

  /// Copy with every entry forced into [eps, 1 - eps].
  ProbabilityVector clamped(double eps) const {
    auto out = *this;
    for (double& p : out.probs_) p = std::clamp(p, eps, 1.0 - eps);
    return out;
  }

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

 private:
  std::vector<double> probs_;
};

enum class AlphaMode {
  fixed,     ///< constant smoothing `alpha`
  schedule,  ///< alpha_t = 1 / (t * m)
};

/// How samples tied with gamma enter the elite set.
enum class EliteRule {
  /// Every sample with objective <= gamma is elite.
  inclusive,
  /// Exactly ceil((1 - beta) S) samples: ranked by objective, then by mask
  /// size, then by draw order. Breaks objective ties toward smaller subsets.
  parsimonious,
};

struct CEParams {
  std::size_t samples = 100;
  double beta = 0.9;
  AlphaMode alpha_mode = AlphaMode::fixed;
  double alpha = 0.7;
  double epsilon = kDefaultClamp;
  std::uint64_t seed = 0;
  EliteRule elite_rule = EliteRule::parsimonious;
  /// Worker threads for objective evaluation within one round.
  std::size_t threads = 1;

  void validate() const {
    if (samples < 2) throw InvalidArgument("samples: must be at least 2");
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta: must lie in (0, 1)");
    if (alpha_mode == AlphaMode::fixed && !(alpha >= 0.0 && alpha <= 1.0))
      throw InvalidArgument("alpha: must lie in [0, 1]");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon: must lie in (0, 0.5)");
  }
};

/// alpha_t = 1 / (t * m), t >= 1.
inline double alpha_schedule(std::size_t t, std::size_t m) {
  detail::require(t >= 1 && m >= 1, "alpha_schedule: t and m must be >= 1");
  return 1.0 / (static_cast<double>(t) * static_cast<double>(m));
}

inline double alpha_for_round(const CEParams& params, std::size_t t, std::size_t m) {
  return params.alpha_mode == AlphaMode::fixed ? params.alpha : alpha_schedule(t, m);
}

struct ScoredSample {
  FeatureMask mask;
  double objective = 0.0;  ///< H(y|U) in bits
};

/// S independent masks with bit i set with probability p_i.
inline std::vector<FeatureMask> sample_masks(const ProbabilityVector& p, std::size_t count,
                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureMask> masks;
  masks.reserve(count);
  std::vector<std::uint8_t> bits(p.size());
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t i = 0; i < p.size(); ++i) bits[i] = rng.bernoulli(p[i]) ? 1 : 0;
    masks.emplace_back(bits);
  }
  return masks;
}

/// O(U(z)) = H(y|U).
inline double evaluate_objective(const DiscreteDataset& data, const FeatureMask& mask) {
  return conditional_entropy(data, mask);
}

/// Zero-based nearest rank, ceil((1 - beta) S) - 1 clamped to [0, S - 1].
/// The 1e-9 slack keeps e.g. (1 - 0.7) * 10 = 3.0000000000000004 at rank 3.
inline std::size_t elite_rank(std::size_t count, double beta) {
  const double raw = std::ceil((1.0 - beta) * static_cast<double>(count) - 1e-9) - 1.0;
  return static_cast<std::size_t>(std::clamp(raw, 0.0, static_cast<double>(count - 1)));
}

/// Nearest-rank (1 - beta) percentile: sorted[ceil((1 - beta) S) - 1].
inline double compute_gamma(std::span<const double> objectives, double beta) {
  detail::require(!objectives.empty(), "compute_gamma: empty objective list");
  detail::require(beta > 0.0 && beta < 1.0, "compute_gamma: beta must lie in (0, 1)");
  std::vector<double> sorted(objectives.begin(), objectives.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[elite_rank(sorted.size(), beta)];
}

inline double compute_gamma(std::initializer_list<double> objectives, double beta) {
  return compute_gamma(std::span<const double>(objectives.begin(), objectives.size()), beta);
}

/// Indices of elite samples, in draw order.
inline std::vector<std::size_t> select_elite(std::span<const ScoredSample> samples, double gamma,
                                             double beta, EliteRule rule) {
  std::vector<std::size_t> elite;
  if (rule == EliteRule::inclusive) {
    for (std::size_t j = 0; j < samples.size(); ++j)
      if (samples[j].objective <= gamma) elite.push_back(j);
    return elite;
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> sizes(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) sizes[j] = samples[j].mask.count();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (samples[a].objective != samples[b].objective)
      return samples[a].objective < samples[b].objective;
    return sizes[a] < sizes[b];
  });
  order.resize(elite_rank(samples.size(), beta) + 1);
  std::sort(order.begin(), order.end());
  return order;
}

/// Smoothed update toward the per-feature frequency over the given elite samples.
inline ProbabilityVector update_probabilities(const ProbabilityVector& p,
                                              std::span<const ScoredSample> samples,
                                              std::span<const std::size_t> elite, double alpha,
                                              double epsilon = kDefaultClamp) {
  if (elite.empty()) throw Error("update_probabilities: empty elite set");
  std::vector<std::size_t> hits(p.size(), 0);
  for (auto j : elite) {
    const auto& mask = samples[j].mask;
    detail::require(mask.size() == p.size(), "update_probabilities: mask length mismatch");
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) hits[i] += bits[i];
  }
  const double elite_count = static_cast<double>(elite.size());
  std::vector<double> next(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double freq = static_cast<double>(hits[i]) / elite_count;
    next[i] = std::clamp((1.0 - alpha) * p[i] + alpha * freq, epsilon, 1.0 - epsilon);
  }
  return ProbabilityVector(std::move(next));
}

/// Update with the elite set {j : objective_j <= gamma}.
inline ProbabilityVector update_probabilities(const ProbabilityVector& p,
                                              std::span<const ScoredSample> samples, double gamma,
                                              double alpha, double epsilon = kDefaultClamp) {
  const auto elite = select_elite(samples, gamma, 0.5, EliteRule::inclusive);
  return update_probabilities(p, samples, elite, alpha, epsilon);
}

struct CERoundResult {
  ProbabilityVector probs;
  std::vector<ScoredSample> samples;
  double gamma = 0.0;
  std::vector<std::size_t> elite;
  double alpha = 0.0;

  /// Lowest objective among this round's samples.
  double best_objective() const {
    double best = samples.front().objective;
    for (const auto& s : samples) best = std::min(best, s.objective);
    return best;
  }
};

/// One full CE iteration (sample, score, gamma, update) at round t >= 1.
/// The sampling stream is seeded from (params.seed, t).
inline CERoundResult ce_step(const DiscreteDataset& data, const ProbabilityVector& p_in,
                             const CEParams& params, std::size_t t) {
  params.validate();
  detail::require(p_in.size() == data.features(),
                  "ce_round: probability vector length " + std::to_string(p_in.size()) +
                      " does not match feature count " + std::to_string(data.features()));
  detail::require(t >= 1, "ce_round: round index starts at 1");

  CERoundResult out;
  auto masks = sample_masks(p_in, params.samples, derive_seed(params.seed, {t}));
  out.samples.resize(masks.size());
  parallel_for(masks.size(), params.threads, [&](std::size_t j) {
    out.samples[j].objective = evaluate_objective(data, masks[j]);
    out.samples[j].mask = std::move(masks[j]);
  });

  std::vector<double> objectives(out.samples.size());
  for (std::size_t j = 0; j < objectives.size(); ++j) objectives[j] = out.samples[j].objective;
  out.gamma = compute_gamma(objectives, params.beta);
  out.elite = select_elite(out.samples, out.gamma, params.beta, params.elite_rule);
  out.alpha = alpha_for_round(params, t, data.features());
  out.probs = update_probabilities(p_in, out.samples, out.elite, out.alpha, params.epsilon);
  return out;
}

inline ProbabilityVector ce_round(const DiscreteDataset& data, const ProbabilityVector& p_in,
                                  const CEParams& params, std::size_t t) {
  return ce_step(data, p_in, params, t).probs;
}

/// Indices with p_i > threshold, ascending.
inline std::vector<std::size_t> select_features(const ProbabilityVector& p,
                                                double threshold = kDefaultSelectionThreshold) {
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > threshold) selected.push_back(i);
  return selected;
}

}  // namespace fedfs
