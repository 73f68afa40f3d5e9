#pragma once

// Experiment driver behind the `fedfs` command line tool.
//
// Configuration is flat `key = value` text, one key per line, `#` starts a
// comment. See README.md for the key list.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fedfs/bounds.hpp"
#include "fedfs/ce_optimizer.hpp"
#include "fedfs/datasets.hpp"
#include "fedfs/error.hpp"
#include "fedfs/federation.hpp"
#include "fedfs/info_core.hpp"
#include "fedfs/metrics.hpp"
#include "fedfs/svg.hpp"

namespace fedfs {

enum class RunMode { centralized, federated };
enum class DataSource { planted, csv, mav, wesad };

struct ExperimentConfig {
  RunMode mode = RunMode::federated;
  DataSource source = DataSource::planted;

  std::string csv_path;
  std::string label_column = "label";
  DiscretizationSpec discretization{10, {}, BinningStrategy::automatic};

  PlantedSpec planted;
  std::optional<std::uint64_t> data_seed;

  std::size_t clients = 10;
  CEParams ce;
  double tau1 = kDefaultTau1;
  double tau2 = kDefaultTau2;
  double rho = 0.0;
  double threshold = kDefaultSelectionThreshold;
  std::size_t max_rounds = 200;
  std::optional<std::size_t> draw_size;
  std::optional<std::uint64_t> record_bytes;

  std::string out_dir = ".";
  std::string dataset_out;  ///< gen-planted target; defaults to <out_dir>/planted.csv
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // bounds sweep
  std::size_t horizon_min = 1;
  std::size_t horizon_max = 5;
  std::size_t trials = 1000;

  std::uint64_t effective_data_seed() const { return data_seed.value_or(seed); }
};

namespace detail {

inline std::string_view strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end)
    throw ConfigError(key, "cannot parse '" + std::string(text) + "' as a number");
  return value;
}

inline std::vector<std::size_t> parse_index_list(const std::string& key, std::string_view text) {
  std::vector<std::size_t> out;
  if (strip(text).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number<std::size_t>(key, strip(text.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::map<std::size_t, std::size_t> parse_copy_map(const std::string& key, std::string_view text) {
  std::map<std::size_t, std::size_t> out;
  if (strip(text).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    const auto item = strip(text.substr(start, comma - start));
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ConfigError(key, "expected copy:source pairs, got '" + std::string(item) + "'");
    out[parse_number<std::size_t>(key, strip(item.substr(0, colon)))] =
        parse_number<std::size_t>(key, strip(item.substr(colon + 1)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline void apply_preset(ExperimentConfig& cfg) {
  if (cfg.source == DataSource::mav) {
    const auto shape = mav_shape();
    cfg.planted.features = shape.schema.columns.size();
    cfg.planted.rows = shape.rows;
    cfg.planted.feature_names = shape.schema.names();
    cfg.planted.relevant = {2160, 2161, 2162, 2163, 2164, 2165};
    cfg.planted.redundant = {{0, 2160}, {1, 2161}, {2, 2162}, {3, 2163}, {4, 2164}, {5, 2165}};
    cfg.planted.label_rule = LabelRule::sum_mod;
    cfg.planted.label_modulus = 7;
    cfg.planted.noise_levels = 10;
    cfg.clients = shape.clients;
  } else if (cfg.source == DataSource::wesad) {
    const auto shape = wesad_shape();
    cfg.planted.features = shape.schema.columns.size();
    cfg.planted.rows = shape.rows;
    cfg.planted.feature_names = shape.schema.names();
    cfg.planted.relevant = {1, 2, 5, 6};
    cfg.planted.redundant.clear();
    cfg.planted.label_rule = LabelRule::sum_mod;
    cfg.planted.label_modulus = 5;
    cfg.planted.noise_levels = 10;
    cfg.clients = shape.clients;
  }
}

inline void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace detail

/// Range checks shared by every subcommand.
inline void validate(const ExperimentConfig& cfg) {
  using detail::check;
  check(cfg.ce.samples >= 2, "samples", "must be at least 2");
  check(cfg.ce.beta > 0.0 && cfg.ce.beta < 1.0, "beta", "must lie in (0, 1)");
  check(cfg.ce.alpha >= 0.0 && cfg.ce.alpha <= 1.0, "alpha", "must lie in [0, 1]");
  check(cfg.ce.epsilon > 0.0 && cfg.ce.epsilon < 0.5, "epsilon", "must lie in (0, 0.5)");
  check(cfg.tau1 >= 0.0 && cfg.tau1 <= 1.0, "tau1", "must lie in [0, 1]");
  check(cfg.tau2 >= 0.0, "tau2", "must be non-negative");
  check(cfg.rho >= 0.0 && cfg.rho < 1.0, "rho", "must lie in [0, 1)");
  check(cfg.threshold > 0.5 && cfg.threshold < 1.0, "threshold", "must lie in (0.5, 1)");
  check(cfg.max_rounds >= 1, "max_rounds", "must be at least 1");
  check(cfg.clients >= 1, "clients", "must be at least 1");
  check(!cfg.draw_size || *cfg.draw_size >= 1, "draw_size", "must be at least 1");
  check(cfg.horizon_min <= cfg.horizon_max, "horizon_min", "must not exceed horizon_max");
  check(cfg.trials >= 1, "trials", "must be at least 1");
  check(cfg.discretization.default_bins >= 2, "bins", "must be at least 2");
  if (cfg.source == DataSource::csv) {
    check(!cfg.csv_path.empty(), "csv_path", "required when dataset = csv");
    check(std::filesystem::exists(cfg.csv_path), "csv_path", "file '" + cfg.csv_path + "' not found");
  }
}

/// Parses configuration text. Unknown keys are rejected.
inline ExperimentConfig parse_config(std::istream& in) {
  using detail::parse_number;
  ExperimentConfig cfg;
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::strip(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
    entries[std::string(detail::strip(view.substr(0, eq)))] = std::string(detail::strip(view.substr(eq + 1)));
  }

  // The dataset preset fills defaults that explicit keys may then override.
  if (auto it = entries.find("dataset"); it != entries.end()) {
    const auto& v = it->second;
    if (v == "planted") cfg.source = DataSource::planted;
    else if (v == "csv") cfg.source = DataSource::csv;
    else if (v == "mav") cfg.source = DataSource::mav;
    else if (v == "wesad") cfg.source = DataSource::wesad;
    else throw ConfigError("dataset", "expected planted, csv, mav or wesad");
    detail::apply_preset(cfg);
    entries.erase(it);
  }

  for (const auto& [key, v] : entries) {
    if (key == "mode") {
      if (v == "centralized") cfg.mode = RunMode::centralized;
      else if (v == "federated") cfg.mode = RunMode::federated;
      else throw ConfigError(key, "expected centralized or federated");
    } else if (key == "csv_path") cfg.csv_path = v;
    else if (key == "label_column") cfg.label_column = v;
    else if (key == "bins") cfg.discretization.default_bins = parse_number<std::size_t>(key, v);
    else if (key == "discretize") {
      if (v == "equal_width") cfg.discretization.strategy = BinningStrategy::equal_width;
      else if (v == "integer") cfg.discretization.strategy = BinningStrategy::integer;
      else if (v == "auto") cfg.discretization.strategy = BinningStrategy::automatic;
      else throw ConfigError(key, "expected equal_width, integer or auto");
    } else if (key == "features") cfg.planted.features = parse_number<std::size_t>(key, v);
    else if (key == "rows") cfg.planted.rows = parse_number<std::size_t>(key, v);
    else if (key == "relevant") cfg.planted.relevant = detail::parse_index_list(key, v);
    else if (key == "redundant") cfg.planted.redundant = detail::parse_copy_map(key, v);
    else if (key == "label_rule") {
      if (v == "xor") cfg.planted.label_rule = LabelRule::xor_rule;
      else if (v == "sum_mod") cfg.planted.label_rule = LabelRule::sum_mod;
      else throw ConfigError(key, "expected xor or sum_mod");
    } else if (key == "label_modulus") cfg.planted.label_modulus = parse_number<std::uint32_t>(key, v);
    else if (key == "noise_levels") cfg.planted.noise_levels = parse_number<std::uint32_t>(key, v);
    else if (key == "data_seed") cfg.data_seed = parse_number<std::uint64_t>(key, v);
    else if (key == "clients") cfg.clients = parse_number<std::size_t>(key, v);
    else if (key == "samples") cfg.ce.samples = parse_number<std::size_t>(key, v);
    else if (key == "beta") cfg.ce.beta = parse_number<double>(key, v);
    else if (key == "alpha") cfg.ce.alpha = parse_number<double>(key, v);
    else if (key == "alpha_mode") {
      if (v == "fixed") cfg.ce.alpha_mode = AlphaMode::fixed;
      else if (v == "schedule") cfg.ce.alpha_mode = AlphaMode::schedule;
      else throw ConfigError(key, "expected fixed or schedule");
    } else if (key == "elite_rule") {
      if (v == "parsimonious") cfg.ce.elite_rule = EliteRule::parsimonious;
      else if (v == "inclusive") cfg.ce.elite_rule = EliteRule::inclusive;
      else throw ConfigError(key, "expected parsimonious or inclusive");
    } else if (key == "epsilon") cfg.ce.epsilon = parse_number<double>(key, v);
    else if (key == "tau1") cfg.tau1 = parse_number<double>(key, v);
    else if (key == "tau2") cfg.tau2 = parse_number<double>(key, v);
    else if (key == "rho") cfg.rho = parse_number<double>(key, v);
    else if (key == "threshold") cfg.threshold = parse_number<double>(key, v);
    else if (key == "max_rounds") cfg.max_rounds = parse_number<std::size_t>(key, v);
    else if (key == "draw_size") cfg.draw_size = parse_number<std::size_t>(key, v);
    else if (key == "record_bytes") cfg.record_bytes = parse_number<std::uint64_t>(key, v);
    else if (key == "out_dir") cfg.out_dir = v;
    else if (key == "dataset_out") cfg.dataset_out = v;
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "horizon_min") cfg.horizon_min = parse_number<std::size_t>(key, v);
    else if (key == "horizon_max") cfg.horizon_max = parse_number<std::size_t>(key, v);
    else if (key == "trials") cfg.trials = parse_number<std::size_t>(key, v);
    else throw ConfigError(key, "unknown configuration key");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Builds the dataset named by the config.
inline DiscreteDataset build_dataset(const ExperimentConfig& cfg) {
  if (cfg.source == DataSource::csv) return load_csv(cfg.csv_path, cfg.label_column, cfg.discretization);
  PlantedSpec spec = cfg.planted;
  spec.seed = cfg.effective_data_seed();
  try {
    return generate_planted(spec);
  } catch (const InvalidArgument& e) {
    throw ConfigError("planted", e.what());
  }
}

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace detail

struct ExperimentResult {
  FederationReport report;
  double selected_conditional_entropy = 0.0;
  double compression_percent = 0.0;
  std::uint64_t cache_bytes = 0;  ///< largest per-client cache
  int exit_code = 0;
};

/// Runs the configured experiment and writes selection.csv, rounds.csv,
/// summary.csv, probabilities.svg and selected_per_round.svg into out_dir.
/// Exit code 0 on convergence, 2 when max_rounds ran out.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto data = build_dataset(cfg);
  const std::size_t m = data.features();

  CEParams ce = cfg.ce;
  FederationSettings settings;
  settings.tau1 = cfg.tau1;
  settings.tau2 = cfg.tau2;
  settings.max_rounds = cfg.max_rounds;
  settings.threshold = cfg.threshold;
  settings.threads = cfg.threads;

  ExperimentResult result;
  if (cfg.mode == RunMode::centralized) {
    std::vector<ClientState> clients = make_clients({data}, derive_seed(cfg.seed, {3}), cfg.draw_size);
    ce.threads = cfg.threads;
    result.report = run_federation(clients, ce, FaultModel{}, settings);
  } else {
    if (cfg.clients > data.rows())
      throw ConfigError("clients", "more clients than dataset rows");
    auto clients = make_clients(partition_iid(data, cfg.clients, derive_seed(cfg.seed, {1})),
                                derive_seed(cfg.seed, {3}), cfg.draw_size);
    result.report = run_federation(clients, ce, FaultModel{cfg.rho, derive_seed(cfg.seed, {2})}, settings);
  }
  const auto& report = result.report;
  result.exit_code = report.converged ? 0 : 2;
  result.selected_conditional_entropy =
      conditional_entropy(data, FeatureMask::from_indices(m, report.selected));
  result.compression_percent = compression_ratio(SelectionSummary{report.selected, m});
  const auto cache = cache_accumulate(report, cfg.record_bytes.value_or(4 * (m + 1)));
  for (auto c : cache) result.cache_bytes = std::max(result.cache_bytes, c);

  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  std::ostringstream sel;
  sel << "feature,name,probability,selected\n";
  for (std::size_t i = 0; i < m; ++i)
    sel << i << ',' << data.feature_names()[i] << ',' << detail::fmt(report.final_global[i]) << ','
        << (report.final_global[i] > cfg.threshold ? 1 : 0) << '\n';
  detail::write_file(dir / "selection.csv", sel.str());

  std::ostringstream rounds;
  rounds << "round,ks_p_value,selected_count,participating_clients,participant_ids,"
            "cumulative_overhead_units,cumulative_overhead_bytes\n";
  std::vector<std::size_t> counts;
  for (const auto& rec : report.rounds) {
    std::string ids;
    for (std::size_t k = 0; k < rec.participants.size(); ++k)
      ids += (k ? ";" : "") + std::to_string(rec.participants[k]);
    rounds << rec.round << ',' << detail::fmt(rec.ks_p_value) << ',' << rec.selected_count << ','
           << rec.participants.size() << ',' << ids << ',' << rec.cumulative_units << ','
           << rec.cumulative_units * report.unit_bytes << '\n';
    counts.push_back(rec.selected_count);
  }
  detail::write_file(dir / "rounds.csv", rounds.str());

  std::ostringstream summary;
  summary << "rounds,converged,selected_count,total_features,compression_percent,"
             "overhead_units,overhead_bytes,cache_bytes,conditional_entropy_bits\n"
          << report.total_rounds() << ',' << (report.converged ? 1 : 0) << ',' << report.selected.size()
          << ',' << m << ',' << detail::fmt(result.compression_percent) << ',' << report.total_units()
          << ',' << report.total_bytes() << ',' << result.cache_bytes << ','
          << detail::fmt(result.selected_conditional_entropy) << '\n';
  detail::write_file(dir / "summary.csv", summary.str());

  detail::write_file(dir / "probabilities.svg",
                     svg::probability_bars(report.final_global.values(), cfg.threshold,
                                           "Final selection probability per feature"));
  detail::write_file(dir / "selected_per_round.svg",
                     svg::count_curve(counts, "Selected features per communication round",
                                      "selected features"));
  return result;
}

struct BoundsRow {
  std::size_t horizon = 0;
  double bound = 1.0;
  double monte_carlo_rate = 1.0;
};

/// Sweeps t' over [horizon_min, horizon_max]: analytic centralized bound next to
/// the observed Monte-Carlo miss rate. Writes bounds.csv into out_dir.
inline std::vector<BoundsRow> run_bounds(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto data = build_dataset(cfg);
  if (data.features() > 4) throw ConfigError("features", "bounds sweep needs m <= 4");
  CEParams ce = cfg.ce;
  const auto optimum = optimal_mask(data);

  BoundInputs in;
  in.samples = ce.samples;
  in.features = data.features();
  in.p0 = 0.5;
  in.optimum = optimum;
  in.alphas = ce.alpha_mode == AlphaMode::schedule
                  ? alpha_schedule_sequence(cfg.horizon_max, data.features())
                  : std::vector<double>(cfg.horizon_max, ce.alpha);

  std::vector<BoundsRow> rows;
  std::ostringstream out;
  out << "t_prime,bound,monte_carlo_rate\n";
  for (std::size_t t = cfg.horizon_min; t <= cfg.horizon_max; ++t) {
    in.horizon = t;
    BoundsRow row{t, centralized_miss_bound(in),
                  monte_carlo_miss_rate(data, ce, t, cfg.trials, std::nullopt, cfg.threads)};
    out << t << ',' << detail::fmt(row.bound) << ',' << detail::fmt(row.monte_carlo_rate) << '\n';
    rows.push_back(row);
  }
  std::filesystem::create_directories(cfg.out_dir);
  detail::write_file(std::filesystem::path(cfg.out_dir) / "bounds.csv", out.str());
  return rows;
}

/// Writes the configured planted dataset as CSV and returns its path.
inline std::string generate_planted_csv(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.source == DataSource::csv) throw ConfigError("dataset", "gen-planted needs a planted or preset dataset");
  const auto data = build_dataset(cfg);
  const std::string path =
      cfg.dataset_out.empty() ? (std::filesystem::path(cfg.out_dir) / "planted.csv").string() : cfg.dataset_out;
  if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
    std::filesystem::create_directories(parent);
  save_csv(path, data);
  return path;
}

}  // namespace fedfs
