#pragma once

// Discrete information-theoretic estimators over integer-coded datasets.
//
// All estimators are plug-in (maximum likelihood) estimates in bits. Joint
// states of a feature subset are identified exactly by the tuple of codes,
// never by binning joint states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedfs/error.hpp"

namespace fedfs {

using Code = std::uint32_t;

/// Binary selection vector z; bit i set means feature i belongs to U.
class FeatureMask {
 public:
  FeatureMask() = default;
  FeatureMask(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
      detail::require(b == 0 || b == 1, "FeatureMask: bits must be 0 or 1");
      bits_.push_back(static_cast<std::uint8_t>(b));
    }
  }
  explicit FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  static FeatureMask none(std::size_t m) { return FeatureMask(std::vector<std::uint8_t>(m, 0)); }
  static FeatureMask all(std::size_t m) { return FeatureMask(std::vector<std::uint8_t>(m, 1)); }
  static FeatureMask from_indices(std::size_t m, std::span<const std::size_t> indices) {
    auto mask = none(m);
    for (auto i : indices) {
      detail::require(i < m, "FeatureMask: index " + std::to_string(i) + " out of range");
      mask.bits_[i] = 1;
    }
    return mask;
  }
  static FeatureMask from_indices(std::size_t m, std::initializer_list<std::size_t> indices) {
    return from_indices(m, std::span<const std::size_t>(indices.begin(), indices.size()));
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool test(std::size_t i) const { return bits_.at(i) != 0; }
  void set(std::size_t i, bool on = true) { bits_.at(i) = on ? 1 : 0; }

  /// k = |U|.
  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(i);
    return out;
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// n x m matrix of non-negative integer codes plus n integer labels.
///
/// Stored column-major; immutable after construction.
class DiscreteDataset {
 public:
  DiscreteDataset() = default;

  /// Builds from row-major feature codes.
  DiscreteDataset(const std::vector<std::vector<Code>>& rows, std::vector<Code> labels,
                  std::vector<std::string> feature_names = {})
      : labels_(std::move(labels)) {
    detail::require(!rows.empty(), "DiscreteDataset: need at least one row");
    detail::require(rows.size() == labels_.size(),
                    "DiscreteDataset: label count " + std::to_string(labels_.size()) +
                        " does not match row count " + std::to_string(rows.size()));
    const std::size_t m = rows.front().size();
    detail::require(m >= 1, "DiscreteDataset: need at least one feature");
    columns_.assign(m, std::vector<Code>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      detail::require(rows[r].size() == m, "DiscreteDataset: row " + std::to_string(r) + " has " +
                                               std::to_string(rows[r].size()) +
                                               " entries, expected " + std::to_string(m));
      for (std::size_t c = 0; c < m; ++c) columns_[c][r] = rows[r][c];
    }
    finish(std::move(feature_names));
  }

  static DiscreteDataset from_columns(std::vector<std::vector<Code>> columns,
                                      std::vector<Code> labels,
                                      std::vector<std::string> feature_names = {}) {
    detail::require(!columns.empty(), "DiscreteDataset: need at least one feature");
    detail::require(!labels.empty(), "DiscreteDataset: need at least one row");
    for (std::size_t c = 0; c < columns.size(); ++c)
      detail::require(columns[c].size() == labels.size(),
                      "DiscreteDataset: column " + std::to_string(c) + " has " +
                          std::to_string(columns[c].size()) + " entries, expected " +
                          std::to_string(labels.size()));
    DiscreteDataset ds;
    ds.columns_ = std::move(columns);
    ds.labels_ = std::move(labels);
    ds.finish(std::move(feature_names));
    return ds;
  }

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t features() const noexcept { return columns_.size(); }

  Code value(std::size_t row, std::size_t feature) const { return columns_.at(feature).at(row); }
  std::span<const Code> column(std::size_t feature) const { return columns_.at(feature); }
  std::span<const Code> labels() const noexcept { return labels_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  /// max code + 1 for a feature column.
  std::uint64_t cardinality(std::size_t feature) const { return card_.at(feature); }
  std::uint64_t label_cardinality() const noexcept { return label_card_; }

  /// Gathers the given rows (duplicates allowed, e.g. a bootstrap draw).
  DiscreteDataset select_rows(std::span<const std::size_t> row_indices) const {
    detail::require(!row_indices.empty(), "select_rows: empty row selection");
    std::vector<std::vector<Code>> cols(features(), std::vector<Code>(row_indices.size()));
    std::vector<Code> labels(row_indices.size());
    for (std::size_t k = 0; k < row_indices.size(); ++k) {
      const auto r = row_indices[k];
      detail::require(r < rows(), "select_rows: row index out of range");
      for (std::size_t c = 0; c < features(); ++c) cols[c][k] = columns_[c][r];
      labels[k] = labels_[r];
    }
    return from_columns(std::move(cols), std::move(labels), names_);
  }

  friend bool operator==(const DiscreteDataset& a, const DiscreteDataset& b) {
    return a.columns_ == b.columns_ && a.labels_ == b.labels_ && a.names_ == b.names_;
  }

 private:
  void finish(std::vector<std::string> names) {
    if (names.empty()) {
      names.reserve(columns_.size());
      for (std::size_t c = 0; c < columns_.size(); ++c) names.push_back("f" + std::to_string(c));
    }
    detail::require(names.size() == columns_.size(),
                    "DiscreteDataset: expected " + std::to_string(columns_.size()) +
                        " feature names, got " + std::to_string(names.size()));
    names_ = std::move(names);
    card_.resize(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c)
      card_[c] = std::uint64_t{*std::max_element(columns_[c].begin(), columns_[c].end())} + 1;
    label_card_ = std::uint64_t{*std::max_element(labels_.begin(), labels_.end())} + 1;
  }

  std::vector<std::vector<Code>> columns_;
  std::vector<Code> labels_;
  std::vector<std::string> names_;
  std::vector<std::uint64_t> card_;
  std::uint64_t label_card_ = 0;
};

enum class BinningStrategy {
  equal_width,  ///< uniform bins between column min and max
  integer,      ///< values must already be non-negative integers; passed through
  automatic,    ///< `integer` for integer-valued columns, `equal_width` otherwise
};

struct DiscretizationSpec {
  std::size_t default_bins = 10;
  std::vector<std::size_t> bins;  ///< per-feature override; empty means default_bins everywhere
  BinningStrategy strategy = BinningStrategy::equal_width;

  std::size_t bins_for(std::size_t feature) const {
    return bins.empty() ? default_bins : bins.at(feature);
  }
};

namespace detail {

inline bool is_code_value(double x) {
  return x >= 0.0 && x <= static_cast<double>(std::numeric_limits<Code>::max()) &&
         std::floor(x) == x;
}

inline std::vector<Code> equal_width_codes(std::span<const double> column, std::size_t bins) {
  const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
  const double lo = *lo_it;
  const double width = *hi_it - lo;
  std::vector<Code> codes(column.size(), 0);
  if (width == 0.0) return codes;
  detail::require(bins >= 2, "discretize: non-constant column needs at least 2 bins");
  for (std::size_t r = 0; r < column.size(); ++r) {
    const double scaled = (column[r] - lo) / width * static_cast<double>(bins);
    codes[r] = static_cast<Code>(std::min(static_cast<std::size_t>(scaled), bins - 1));
  }
  return codes;
}

}  // namespace detail

/// Maps an n x m matrix of reals (row-major) to integer codes, column by column.
/// Constant columns map to code 0.
inline std::vector<std::vector<Code>> discretize(const std::vector<std::vector<double>>& rows,
                                                 const DiscretizationSpec& spec) {
  detail::require(!rows.empty(), "discretize: empty matrix");
  const std::size_t n = rows.size();
  const std::size_t m = rows.front().size();
  detail::require(spec.bins.empty() || spec.bins.size() == m,
                  "discretize: bin spec has " + std::to_string(spec.bins.size()) +
                      " entries for " + std::to_string(m) + " columns");
  std::vector<std::vector<Code>> out(n, std::vector<Code>(m));
  std::vector<double> column(n);
  for (std::size_t c = 0; c < m; ++c) {
    bool integral = true;
    for (std::size_t r = 0; r < n; ++r) {
      detail::require(rows[r].size() == m, "discretize: row " + std::to_string(r) + " is ragged");
      column[r] = rows[r][c];
      if (!std::isfinite(column[r]))
        throw InvalidArgument("discretize: non-finite value in column " + std::to_string(c) +
                              " (row " + std::to_string(r) + ")");
      integral = integral && detail::is_code_value(column[r]);
    }
    std::vector<Code> codes;
    switch (spec.strategy) {
      case BinningStrategy::integer:
        if (!integral)
          throw InvalidArgument("discretize: column " + std::to_string(c) +
                                " is not non-negative integer valued");
        [[fallthrough]];
      case BinningStrategy::automatic:
        if (integral) {
          codes.resize(n);
          for (std::size_t r = 0; r < n; ++r) codes[r] = static_cast<Code>(column[r]);
          break;
        }
        [[fallthrough]];
      case BinningStrategy::equal_width:
        codes = detail::equal_width_codes(column, spec.bins_for(c));
        break;
    }
    for (std::size_t r = 0; r < n; ++r) out[r][c] = codes[r];
  }
  return out;
}

namespace detail {

/// sum c*log2(c) over counts.
inline double sum_c_log_c(std::span<const std::uint32_t> counts) {
  double s = 0.0;
  for (auto c : counts)
    if (c > 1) s += static_cast<double>(c) * std::log2(static_cast<double>(c));
  return s;
}

/// Refines row group ids by one more code column. Returns the new group count.
/// `ids` holds dense ids in [0, groups); on return it holds dense ids of the
/// (old id, code) pairs, numbered in order of first appearance.
class GroupRefiner {
 public:
  std::size_t refine(std::vector<std::uint32_t>& ids, std::size_t groups,
                     std::span<const Code> codes, std::uint64_t card) {
    constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t next = 0;
    const std::uint64_t cells = static_cast<std::uint64_t>(groups) * card;
    if (cells <= kTableLimit) {
      table_.assign(static_cast<std::size_t>(cells), kUnset);
      for (std::size_t r = 0; r < ids.size(); ++r) {
        auto& slot = table_[static_cast<std::size_t>(ids[r] * card + codes[r])];
        if (slot == kUnset) slot = next++;
        ids[r] = slot;
      }
    } else {
      map_.clear();
      for (std::size_t r = 0; r < ids.size(); ++r) {
        const auto [it, inserted] = map_.try_emplace(ids[r] * card + codes[r], next);
        if (inserted) ++next;
        ids[r] = it->second;
      }
    }
    return next;
  }

 private:
  static constexpr std::uint64_t kTableLimit = std::uint64_t{1} << 22;
  std::vector<std::uint32_t> table_;
  std::unordered_map<std::uint64_t, std::uint32_t> map_;
};

inline std::vector<std::uint32_t> counts_of(std::span<const std::uint32_t> ids, std::size_t groups) {
  std::vector<std::uint32_t> counts(groups, 0);
  for (auto id : ids) ++counts[id];
  return counts;
}

inline double entropy_of_codes(std::span<const Code> values) {
  std::vector<std::uint32_t> ids(values.size(), 0);
  GroupRefiner refiner;
  const auto card = std::uint64_t{*std::max_element(values.begin(), values.end())} + 1;
  const auto groups = refiner.refine(ids, 1, values, card);
  const double n = static_cast<double>(values.size());
  const double h = (n * std::log2(n) - sum_c_log_c(counts_of(ids, groups))) / n;
  return std::max(0.0, h);
}

}  // namespace detail

/// Plug-in entropy H(labels) in bits.
inline double entropy(std::span<const Code> labels) {
  detail::require(!labels.empty(), "entropy: empty vector");
  return detail::entropy_of_codes(labels);
}

inline double entropy(std::initializer_list<Code> labels) {
  return entropy(std::span<const Code>(labels.begin(), labels.size()));
}

/// Plug-in conditional entropy H(y|U) in bits, U = features selected by `mask`.
/// An empty mask yields H(y). The result is clamped to [0, H(y)].
inline double conditional_entropy(const DiscreteDataset& data, const FeatureMask& mask) {
  detail::require(mask.size() == data.features(),
                  "conditional_entropy: mask length " + std::to_string(mask.size()) +
                      " does not match feature count " + std::to_string(data.features()));
  const double h_y = entropy(data.labels());
  const std::size_t n = data.rows();

  std::vector<std::uint32_t> ids(n, 0);
  std::size_t groups = 1;
  detail::GroupRefiner refiner;
  const auto bits = mask.bits();
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (!bits[j]) continue;
    groups = refiner.refine(ids, groups, data.column(j), data.cardinality(j));
    // Every row is its own joint state: y is a function of U on this sample.
    if (groups == n) return 0.0;
  }
  if (groups == 1) return h_y;

  const auto group_counts = detail::counts_of(ids, groups);
  const auto joint_groups = refiner.refine(ids, groups, data.labels(), data.label_cardinality());
  const auto joint_counts = detail::counts_of(ids, joint_groups);
  const double h = (detail::sum_c_log_c(group_counts) - detail::sum_c_log_c(joint_counts)) /
                   static_cast<double>(n);
  return std::clamp(h, 0.0, h_y);
}

/// I(U;y) = H(y) - H(y|U), with cancellation noise below 1e-12 clamped to 0.
inline double mutual_information(const DiscreteDataset& data, const FeatureMask& mask) {
  const double h_cond = conditional_entropy(data, mask);
  const double mi = entropy(data.labels()) - h_cond;
  return (mi < 0.0 && mi > -1e-12) ? 0.0 : mi;
}

}  // namespace fedfs
