#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedfs/error.hpp"
#include "fedfs/federation.hpp"
#include "fedfs/info_core.hpp"

namespace fedfs {

/// Fraction of positions where prediction and truth agree.
inline double accuracy(std::span<const Code> predicted, std::span<const Code> actual) {
  detail::require(predicted.size() == actual.size(),
                  "accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                      std::to_string(actual.size()) + " labels");
  detail::require(!actual.empty(), "accuracy: empty label vector");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) hits += predicted[i] == actual[i];
  return static_cast<double>(hits) / static_cast<double>(actual.size());
}

inline double accuracy(const std::vector<Code>& predicted, const std::vector<Code>& actual) {
  return accuracy(std::span<const Code>(predicted), std::span<const Code>(actual));
}

struct SelectionSummary {
  std::vector<std::size_t> selected;  ///< F
  std::size_t total = 0;              ///< |D|
};

/// Percent of features eliminated, 100 (1 - |F| / |D|).
inline double compression_ratio(const SelectionSummary& s) {
  detail::require(s.total >= 1, "compression_ratio: feature count must be >= 1");
  std::vector<bool> seen(s.total, false);
  for (auto i : s.selected) {
    detail::require(i < s.total, "compression_ratio: selected index " + std::to_string(i) +
                                     " outside a set of " + std::to_string(s.total));
    detail::require(!seen[i], "compression_ratio: duplicate selected index " + std::to_string(i));
    seen[i] = true;
  }
  return 100.0 * (1.0 - static_cast<double>(s.selected.size()) / static_cast<double>(s.total));
}

/// Same, from counts only.
inline double compression_ratio(std::size_t selected_count, std::size_t total) {
  detail::require(total >= 1, "compression_ratio: feature count must be >= 1");
  detail::require(selected_count <= total, "compression_ratio: more selected than available");
  return 100.0 * (1.0 - static_cast<double>(selected_count) / static_cast<double>(total));
}

struct OverheadInputs {
  std::uint64_t rounds = 0;        ///< R
  std::uint64_t clients = 0;       ///< L
  std::uint64_t nonzero = 0;       ///< z
  std::uint64_t bitmap_units = 0;  ///< b
  std::uint64_t unit_bytes = 4;
};

struct Overhead {
  std::uint64_t units = 0;
  std::uint64_t bytes = 0;

  friend bool operator==(const Overhead&, const Overhead&) = default;
};

/// N_OH = R * L * 2 * (z + 1 + b) scalar slots.
inline Overhead network_overhead(const OverheadInputs& in) {
  const std::uint64_t units = in.rounds * in.clients * 2 * (in.nonzero + 1 + in.bitmap_units);
  return {units, units * in.unit_bytes};
}

/// Cache footprint per client: sum over rounds of records drawn * record size.
inline std::vector<std::uint64_t> cache_accumulate(const FederationReport& report,
                                                   std::uint64_t record_bytes) {
  std::vector<std::uint64_t> per_client;
  for (const auto& rec : report.rounds) {
    if (per_client.size() < rec.draw_sizes.size()) per_client.resize(rec.draw_sizes.size(), 0);
    for (std::size_t l = 0; l < rec.draw_sizes.size(); ++l)
      per_client[l] += static_cast<std::uint64_t>(rec.draw_sizes[l]) * record_bytes;
  }
  return per_client;
}

}  // namespace fedfs
