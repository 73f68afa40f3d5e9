#pragma once

// Upper bounds on the probability that CE has not produced the optimal mask
// z* within t' rounds, and a Monte-Carlo estimate of the same event.
//
// With P1 = P(z^1 = z*) = prod_i (p0 if z*_i = 1 else 1 - p0) and
// A_tau(k) = prod_{j < tau} (1 - alpha_j)^k:
//
//   centralized:  (1 - P1) * prod_{tau=2}^{t'} (1 - P1 A_tau(m))^S
//   per node l:   (1 - P1) * prod_{tau=2}^{t'} [C(m, m_l) P1 A_tau(m - m_l) (1 - P1 A_tau(m_l))]^S
//   federated:    sum_l q_l * per node l
//
// The per-node factor can exceed 1; evaluations are clamped to [0, 1] and the
// clamp is reported.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedfs/ce_optimizer.hpp"
#include "fedfs/error.hpp"
#include "fedfs/info_core.hpp"
#include "fedfs/parallel.hpp"

namespace fedfs {

struct BoundInputs {
  std::size_t horizon = 1;  ///< t'
  std::size_t samples = 1;  ///< S
  std::size_t features = 1; ///< m
  double p0 = 0.5;          ///< uniform initial probability
  /// alpha_1, alpha_2, ...; needs at least t' - 1 entries.
  std::vector<double> alphas;
  FeatureMask optimum;      ///< z*
};

struct NodeBoundInput {
  std::size_t differing = 0;  ///< m_l
  double weight = 0.0;        ///< q_l
};

struct BoundValue {
  double value = 1.0;
  bool clamped = false;
};

/// alphas[j - 1] = 1 / (j * m), j = 1..count.
inline std::vector<double> alpha_schedule_sequence(std::size_t count, std::size_t m) {
  std::vector<double> out(count);
  for (std::size_t j = 1; j <= count; ++j) out[j - 1] = alpha_schedule(j, m);
  return out;
}

/// sum_{tau=1}^{T} prod_{j<tau} (1 - alpha_j)^m under the 1/(j m) schedule.
/// Grows without bound in T.
inline double schedule_partial_sum(std::size_t terms, std::size_t m) {
  double sum = 0.0;
  double prod = 1.0;
  for (std::size_t tau = 1; tau <= terms; ++tau) {
    sum += prod;
    prod *= std::pow(1.0 - alpha_schedule(tau, m), static_cast<double>(m));
  }
  return sum;
}

/// P(z^1 = z*) for a uniform initial probability p0.
inline double initial_hit_probability(const FeatureMask& optimum, double p0) {
  double p = 1.0;
  for (auto bit : optimum.bits()) p *= bit ? p0 : 1.0 - p0;
  return p;
}

namespace detail {

inline void validate_bound_inputs(const BoundInputs& in) {
  require(in.optimum.size() == in.features, "bounds: optimum mask length must equal m");
  require(in.p0 >= 0.0 && in.p0 <= 1.0, "bounds: p0 must lie in [0, 1]");
  require(in.horizon <= 1 || in.alphas.size() >= in.horizon - 1,
          "bounds: need t' - 1 alpha values");
  for (double a : in.alphas) require(a >= 0.0 && a < 1.0, "bounds: alpha values must lie in [0, 1)");
}

/// prod_{j=1}^{tau-1} (1 - alpha_j)^k
inline double retention(std::span<const double> alphas, std::size_t tau, double k) {
  double prod = 1.0;
  for (std::size_t j = 1; j < tau; ++j) prod *= std::pow(1.0 - alphas[j - 1], k);
  return prod;
}

inline double binomial(std::size_t n, std::size_t k) {
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(static_cast<double>(n - k) + 1.0));
}

}  // namespace detail

/// Centralized miss bound; t' = 0 gives 1.
inline double centralized_miss_bound(const BoundInputs& in) {
  detail::validate_bound_inputs(in);
  if (in.horizon == 0) return 1.0;
  const double p1 = initial_hit_probability(in.optimum, in.p0);
  const double m = static_cast<double>(in.features);
  double bound = 1.0 - p1;
  for (std::size_t tau = 2; tau <= in.horizon; ++tau)
    bound *= std::pow(1.0 - p1 * detail::retention(in.alphas, tau, m), static_cast<double>(in.samples));
  return std::clamp(bound, 0.0, 1.0);
}

/// Per-node bound for a node whose optimum differs from z* in m_l entries.
inline BoundValue node_miss_bound(const BoundInputs& in, std::size_t differing) {
  detail::validate_bound_inputs(in);
  detail::require(differing <= in.features, "bounds: m_l must not exceed m");
  if (in.horizon == 0) return {1.0, false};
  const double p1 = initial_hit_probability(in.optimum, in.p0);
  const double m = static_cast<double>(in.features);
  const double ml = static_cast<double>(differing);
  const double choose = detail::binomial(in.features, differing);
  double raw = 1.0 - p1;
  for (std::size_t tau = 2; tau <= in.horizon; ++tau) {
    const double factor = choose * p1 * detail::retention(in.alphas, tau, m - ml) *
                          (1.0 - p1 * detail::retention(in.alphas, tau, ml));
    raw *= std::pow(factor, static_cast<double>(in.samples));
  }
  const double value = std::clamp(raw, 0.0, 1.0);
  return {value, value != raw};
}

/// Weighted mixture of per-node bounds; weights must sum to 1.
inline BoundValue federated_miss_bound(const BoundInputs& in, std::span<const NodeBoundInput> nodes) {
  detail::require(!nodes.empty(), "federated_miss_bound: need at least one node");
  double weight_sum = 0.0;
  for (const auto& n : nodes) {
    detail::require(n.weight >= 0.0, "federated_miss_bound: negative weight");
    weight_sum += n.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9)
    throw InvalidArgument("federated_miss_bound: weights sum to " + std::to_string(weight_sum) +
                          ", expected 1");
  BoundValue total{0.0, false};
  for (const auto& n : nodes) {
    const auto node = node_miss_bound(in, n.differing);
    total.value += n.weight * node.value;
    total.clamped = total.clamped || node.clamped;
  }
  const double clamped = std::clamp(total.value, 0.0, 1.0);
  total.clamped = total.clamped || clamped != total.value;
  total.value = clamped;
  return total;
}

/// Exhaustive search for z*: the minimum-objective mask, ties broken toward
/// fewer features. Throws if the optimum is still not unique.
inline FeatureMask optimal_mask(const DiscreteDataset& data) {
  const std::size_t m = data.features();
  detail::require(m <= 20, "optimal_mask: exhaustive search limited to m <= 20");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_size = 0;
  std::vector<std::uint64_t> winners;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << m); ++code) {
    auto mask = FeatureMask::none(m);
    for (std::size_t i = 0; i < m; ++i) mask.set(i, (code >> i) & 1u);
    const double h = conditional_entropy(data, mask);
    const std::size_t size = mask.count();
    if (h < best || (h == best && size < best_size)) {
      best = h;
      best_size = size;
      winners = {code};
    } else if (h == best && size == best_size) {
      winners.push_back(code);
    }
  }
  if (winners.size() != 1)
    throw InvalidArgument("optimal_mask: " + std::to_string(winners.size()) +
                          " masks share the optimum; the bound needs a unique z*");
  auto mask = FeatureMask::none(m);
  for (std::size_t i = 0; i < m; ++i) mask.set(i, (winners.front() >> i) & 1u);
  return mask;
}

/// Fraction of independent CE runs (trial i seeded with i) in which no mask
/// sampled in rounds 1..t' equals z*. t' = 0 counts as a miss.
inline double monte_carlo_miss_rate(const DiscreteDataset& data, const CEParams& params,
                                    std::size_t horizon, std::size_t trials,
                                    std::optional<ProbabilityVector> initial = {},
                                    std::size_t threads = 1) {
  detail::require(data.features() <= 4, "monte_carlo_miss_rate: m must be <= 4");
  detail::require(trials >= 1, "monte_carlo_miss_rate: need at least one trial");
  const auto optimum = optimal_mask(data);
  if (horizon == 0) return 1.0;
  const auto start = initial.value_or(ProbabilityVector::uniform(data.features()));
  detail::require(start.size() == data.features(), "monte_carlo_miss_rate: initial vector length");

  std::vector<std::uint8_t> missed(trials, 1);
  parallel_for(trials, threads, [&](std::size_t trial) {
    CEParams local = params;
    local.seed = trial;
    local.threads = 1;
    auto p = start;
    for (std::size_t t = 1; t <= horizon; ++t) {
      auto round = ce_step(data, p, local, t);
      for (const auto& s : round.samples)
        if (s.mask == optimum) {
          missed[trial] = 0;
          return;
        }
      p = std::move(round.probs);
    }
  });
  std::size_t misses = 0;
  for (auto v : missed) misses += v;
  return static_cast<double>(misses) / static_cast<double>(trials);
}

}  // namespace fedfs
