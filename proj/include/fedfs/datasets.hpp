#pragma once

// Dataset ingestion (CSV), i.i.d. partitioning and planted-feature generators.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fedfs/error.hpp"
#include "fedfs/info_core.hpp"
#include "fedfs/random.hpp"

namespace fedfs {

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Reads a header + rows CSV. Rows and columns in error messages are 1-based;
/// row 1 is the first data row after the header.
inline DiscreteDataset read_csv(std::istream& in, const std::string& label_column,
                                const DiscretizationSpec& discretization) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: missing header row");
  std::vector<std::string> header;
  for (auto cell : detail::split_csv_line(line)) header.emplace_back(detail::trim(cell));
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw DataError("csv: missing label column '" + label_column + "'");
  const auto label_pos = static_cast<std::size_t>(label_it - header.begin());
  if (header.size() < 2) throw DataError("csv: need at least one feature column");

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_pos) names.push_back(header[c]);

  std::vector<std::vector<double>> rows;
  std::vector<Code> labels;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty() || detail::trim(line) == "\r") continue;
    ++row_no;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("csv: row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(header.size()));
    std::vector<double> features;
    features.reserve(header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double value = 0.0;
      if (!detail::parse_double(cells[c], value))
        throw DataError("csv: non-numeric cell at row " + std::to_string(row_no) + ", column " +
                        std::to_string(c + 1) + " ('" + std::string(cells[c]) + "')");
      if (c == label_pos) {
        if (!detail::is_code_value(value))
          throw DataError("csv: label at row " + std::to_string(row_no) +
                          " is not a non-negative integer");
        labels.push_back(static_cast<Code>(value));
      } else {
        features.push_back(value);
      }
    }
    rows.push_back(std::move(features));
  }
  if (rows.empty()) throw DataError("csv: no data rows");
  return DiscreteDataset(discretize(rows, discretization), std::move(labels), std::move(names));
}

inline DiscreteDataset load_csv(const std::string& path, const std::string& label_column = "label",
                                const DiscretizationSpec& discretization = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  return read_csv(in, label_column, discretization);
}

/// Writes codes as integers: feature columns in order, then `label`.
inline void write_csv(std::ostream& out, const DiscreteDataset& data) {
  for (const auto& name : data.feature_names()) out << name << ',';
  out << "label\n";
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.features(); ++c) out << data.value(r, c) << ',';
    out << data.labels()[r] << '\n';
  }
}

inline void save_csv(const std::string& path, const DiscreteDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("csv: cannot write '" + path + "'");
  write_csv(out, data);
}

// ---------------------------------------------------------------------------
// Partitioning

/// Shuffles rows and deals them round-robin into L disjoint partitions of
/// floor(n / L) rows each; the n mod L leftover rows are dropped.
inline std::vector<DiscreteDataset> partition_iid(const DiscreteDataset& data, std::size_t parts,
                                                  std::uint64_t seed) {
  detail::require(parts >= 1, "partition_iid: need at least one partition");
  detail::require(parts <= data.rows(), "partition_iid: " + std::to_string(parts) +
                                            " partitions requested for " +
                                            std::to_string(data.rows()) + " rows");
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng(seed).shuffle(order.begin(), order.end());
  const std::size_t per_part = data.rows() / parts;
  std::vector<std::vector<std::size_t>> buckets(parts);
  for (std::size_t k = 0; k < per_part * parts; ++k) buckets[k % parts].push_back(order[k]);
  std::vector<DiscreteDataset> out;
  out.reserve(parts);
  for (const auto& rows : buckets) out.push_back(data.select_rows(rows));
  return out;
}

// ---------------------------------------------------------------------------
// Planted datasets

enum class LabelRule {
  xor_rule,  ///< y = parity of the relevant bits
  sum_mod,   ///< y = (sum of relevant bits) mod k
};

/// Synthetic dataset with a known Markov blanket.
///
/// Relevant columns are balanced uniform bits and y is a function of them.
/// Each redundant column is an exact copy of a relevant source column; noise
/// columns are independent uniform codes in [0, noise_levels).
struct PlantedSpec {
  std::size_t features = 4;
  std::size_t rows = 1024;
  std::vector<std::size_t> relevant{0, 1};
  std::map<std::size_t, std::size_t> redundant;  ///< copy index -> source relevant index
  LabelRule label_rule = LabelRule::xor_rule;
  std::uint32_t label_modulus = 2;
  std::uint32_t noise_levels = 2;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;

  /// Indices in neither `relevant` nor `redundant`, ascending.
  std::vector<std::size_t> noise() const {
    std::set<std::size_t> used(relevant.begin(), relevant.end());
    for (const auto& [copy, src] : redundant) used.insert(copy);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features; ++i)
      if (!used.count(i)) out.push_back(i);
    return out;
  }

  void validate() const {
    detail::require(features >= 1, "planted: need at least one feature");
    detail::require(rows >= 1, "planted: need at least one row");
    detail::require(!relevant.empty(), "planted: need at least one relevant feature");
    detail::require(relevant.size() <= 30, "planted: at most 30 relevant features");
    std::set<std::size_t> seen;
    for (auto i : relevant) {
      detail::require(i < features, "planted: relevant index " + std::to_string(i) + " out of range");
      detail::require(seen.insert(i).second, "planted: duplicate relevant index " + std::to_string(i));
    }
    const std::set<std::size_t> rel(relevant.begin(), relevant.end());
    for (const auto& [copy, src] : redundant) {
      detail::require(copy < features, "planted: redundant index " + std::to_string(copy) + " out of range");
      detail::require(seen.insert(copy).second, "planted: index " + std::to_string(copy) + " used twice");
      detail::require(rel.count(src) == 1,
                      "planted: redundant source " + std::to_string(src) + " is not relevant");
    }
    if (label_rule == LabelRule::xor_rule)
      detail::require(rows % 4 == 0, "planted: xor datasets need a row count divisible by 4");
    else
      detail::require(label_modulus >= 2, "planted: label modulus must be >= 2");
    detail::require(noise_levels >= 1, "planted: noise_levels must be >= 1");
    detail::require(feature_names.empty() || feature_names.size() == features,
                    "planted: feature name count mismatch");
  }
};

/// Builds the planted dataset. Relevant bit patterns are dealt cyclically over
/// all 2^k combinations before shuffling, so every pattern occurs equally often
/// whenever 2^k divides n.
inline DiscreteDataset generate_planted(const PlantedSpec& spec) {
  spec.validate();
  const std::size_t n = spec.rows;
  const std::size_t k = spec.relevant.size();
  Rng rng(spec.seed);

  std::vector<std::uint64_t> patterns(n);
  const std::uint64_t combos = std::uint64_t{1} << k;
  for (std::size_t r = 0; r < n; ++r) patterns[r] = r % combos;
  // Rows beyond the last full cycle get uniform patterns.
  for (std::size_t r = (n / combos) * combos; r < n; ++r) patterns[r] = rng.below(combos);
  rng.shuffle(patterns.begin(), patterns.end());

  std::vector<std::vector<Code>> columns(spec.features, std::vector<Code>(n, 0));
  std::vector<Code> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::uint32_t ones = 0;
    for (std::size_t b = 0; b < k; ++b) {
      const Code bit = static_cast<Code>((patterns[r] >> b) & 1u);
      columns[spec.relevant[b]][r] = bit;
      ones += bit;
    }
    labels[r] = spec.label_rule == LabelRule::xor_rule ? (ones & 1u) : ones % spec.label_modulus;
  }
  for (const auto& [copy, src] : spec.redundant) columns[copy] = columns[src];
  for (auto i : spec.noise())
    for (std::size_t r = 0; r < n; ++r) columns[i][r] = static_cast<Code>(rng.below(spec.noise_levels));

  return DiscreteDataset::from_columns(std::move(columns), std::move(labels), spec.feature_names);
}

// ---------------------------------------------------------------------------
// eRID layouts

enum class ColumnKind { hog, accelerometer, angular_velocity, physiological };

struct ColumnDescriptor {
  std::string name;
  ColumnKind kind;
};

struct ERIDSchema {
  std::string name;
  std::vector<ColumnDescriptor> columns;

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) out.push_back(c.name);
    return out;
  }
};

/// 2160 HOG bins followed by six IMU channels.
inline ERIDSchema mav_schema() {
  ERIDSchema s{"mav", {}};
  s.columns.reserve(2166);
  for (int i = 0; i < 2160; ++i) s.columns.push_back({"HOG_" + std::to_string(i), ColumnKind::hog});
  for (const char* axis : {"x", "y", "z"})
    s.columns.push_back({std::string("ACC_") + axis, ColumnKind::accelerometer});
  for (const char* axis : {"x", "y", "z"})
    s.columns.push_back({std::string("AV_") + axis, ColumnKind::angular_velocity});
  return s;
}

/// Eight chest-sensor channels.
inline ERIDSchema wesad_schema() {
  return {"wesad",
          {{"ACC_x", ColumnKind::accelerometer},
           {"ACC_y", ColumnKind::accelerometer},
           {"ACC_z", ColumnKind::accelerometer},
           {"ECG", ColumnKind::physiological},
           {"EMG", ColumnKind::physiological},
           {"EDA", ColumnKind::physiological},
           {"TEMP", ColumnKind::physiological},
           {"RSP", ColumnKind::physiological}}};
}

/// Record counts matching each preset: 2911 MAV records split 10 ways.
struct PresetShape {
  ERIDSchema schema;
  std::size_t rows;
  std::size_t clients;
};

inline PresetShape mav_shape() { return {mav_schema(), 2911, 10}; }
inline PresetShape wesad_shape() { return {wesad_schema(), 5000, 5}; }

}  // namespace fedfs
