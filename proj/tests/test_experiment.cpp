#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedfs/experiment.hpp"

using namespace fedfs;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fedfs_test_experiment" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

const char* kSmallPlanted =
    "mode = federated\n"
    "features = 16\n"
    "rows = 512\n"
    "relevant = 0,1,2\n"
    "redundant = 3:0, 4:1\n"
    "label_rule = sum_mod\n"
    "label_modulus = 4\n"
    "clients = 4\n"
    "samples = 60\n"
    "max_rounds = 80\n"
    "seed = 5\n";

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const auto cfg = parse(
      "# comment line\n"
      "mode = centralized   # trailing comment\n"
      "samples = 200\n"
      "beta=0.95\n"
      "alpha_mode = schedule\n"
      "elite_rule = inclusive\n"
      "rho = 0.2\n"
      "redundant = 4:0,5:1\n"
      "relevant = 0, 1\n"
      "draw_size = 50\n"
      "\n");
  EXPECT_EQ(cfg.mode, RunMode::centralized);
  EXPECT_EQ(cfg.ce.samples, 200u);
  EXPECT_DOUBLE_EQ(cfg.ce.beta, 0.95);
  EXPECT_EQ(cfg.ce.alpha_mode, AlphaMode::schedule);
  EXPECT_EQ(cfg.ce.elite_rule, EliteRule::inclusive);
  EXPECT_DOUBLE_EQ(cfg.rho, 0.2);
  EXPECT_EQ(cfg.planted.redundant, (std::map<std::size_t, std::size_t>{{4, 0}, {5, 1}}));
  EXPECT_EQ(cfg.planted.relevant, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(cfg.draw_size, std::optional<std::size_t>(50));
}

TEST(Config, Defaults) {
  const auto cfg = parse("");
  EXPECT_EQ(cfg.mode, RunMode::federated);
  EXPECT_DOUBLE_EQ(cfg.tau1, 0.995);
  EXPECT_DOUBLE_EQ(cfg.tau2, 1e-6);
  EXPECT_DOUBLE_EQ(cfg.threshold, 0.99);
  EXPECT_EQ(cfg.max_rounds, 200u);
  EXPECT_EQ(cfg.ce.samples, 100u);
  EXPECT_DOUBLE_EQ(cfg.ce.alpha, 0.7);
}

TEST(Config, PresetsFillShape) {
  const auto mav = parse("dataset = mav\n");
  EXPECT_EQ(mav.planted.features, 2166u);
  EXPECT_EQ(mav.planted.rows, 2911u);
  EXPECT_EQ(mav.clients, 10u);
  const auto wesad = parse("dataset = wesad\nclients = 3\n");
  EXPECT_EQ(wesad.planted.features, 8u);
  EXPECT_EQ(wesad.clients, 3u);
  EXPECT_EQ(build_dataset(wesad).feature_names(), wesad_schema().names());
}

TEST(Config, Rejections) {
  auto field_of = [](const std::string& text) {
    try {
      validate(parse(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of("beta = 1.5\n"), "beta");
  EXPECT_EQ(field_of("rho = 1\n"), "rho");
  EXPECT_EQ(field_of("samples = 1\n"), "samples");
  EXPECT_EQ(field_of("max_rounds = 0\n"), "max_rounds");
  EXPECT_EQ(field_of("threshold = 0.3\n"), "threshold");
  EXPECT_EQ(field_of("dataset = csv\n"), "csv_path");
  EXPECT_EQ(field_of("dataset = csv\ncsv_path = /nonexistent.csv\n"), "csv_path");
  EXPECT_EQ(field_of("colour = blue\n"), "colour");
  EXPECT_EQ(field_of("samples = many\n"), "samples");
  EXPECT_EQ(field_of("mode = sideways\n"), "mode");
  EXPECT_EQ(field_of("redundant = 3\n"), "redundant");
  EXPECT_EQ(field_of("beta = 0.9\n"), "<none>");
  EXPECT_THROW(parse("just words\n"), ConfigError);
}

TEST(RunExperiment, PlantedFederatedRun) {
  auto cfg = parse(kSmallPlanted);
  cfg.out_dir = fresh_dir("planted").string();
  const auto result = run_experiment(cfg);
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_TRUE(result.report.converged);
  EXPECT_LE(result.selected_conditional_entropy, 0.01);

  const auto dir = fs::path(cfg.out_dir);
  for (const char* name : {"selection.csv", "rounds.csv", "summary.csv", "probabilities.svg",
                           "selected_per_round.svg"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;

  const auto summary = read_rows(dir / "summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  const auto& head = summary[0];
  auto col = [&](const std::string& name) {
    return summary[1][static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin())];
  };
  const auto rounds = read_rows(dir / "rounds.csv");
  const std::size_t selected = std::stoul(col("selected_count"));
  EXPECT_EQ(std::stoul(col("total_features")), 16u);
  EXPECT_NEAR(std::stod(col("compression_percent")), 100.0 * (1.0 - selected / 16.0), 1e-9);
  EXPECT_EQ(std::stoul(col("rounds")), rounds.size() - 1);
  EXPECT_EQ(col("overhead_units"), rounds.back()[5]);
  EXPECT_EQ(col("overhead_bytes"), rounds.back()[6]);
  EXPECT_EQ(col("converged"), "1");

  const auto selection = read_rows(dir / "selection.csv");
  ASSERT_EQ(selection.size(), 17u);
  std::size_t flagged = 0;
  for (std::size_t r = 1; r < selection.size(); ++r) flagged += selection[r][3] == "1";
  EXPECT_EQ(flagged, selected);
}

TEST(RunExperiment, RoundLimitGivesExitTwo) {
  auto cfg = parse(kSmallPlanted);
  cfg.max_rounds = 1;
  cfg.out_dir = fresh_dir("limit").string();
  const auto result = run_experiment(cfg);
  EXPECT_EQ(result.exit_code, 2);
  EXPECT_EQ(read_rows(fs::path(cfg.out_dir) / "rounds.csv").size(), 2u);
}

TEST(RunExperiment, ByteIdenticalReruns) {
  auto cfg = parse(kSmallPlanted);
  cfg.rho = 0.2;
  cfg.out_dir = fresh_dir("a").string();
  run_experiment(cfg);
  auto again = cfg;
  again.out_dir = fresh_dir("b").string();
  again.threads = 4;
  run_experiment(again);
  for (const char* name : {"selection.csv", "rounds.csv", "summary.csv"})
    EXPECT_EQ(slurp(fs::path(cfg.out_dir) / name), slurp(fs::path(again.out_dir) / name)) << name;
}

TEST(RunExperiment, CentralizedMode) {
  auto cfg = parse(kSmallPlanted);
  cfg.mode = RunMode::centralized;
  cfg.out_dir = fresh_dir("central").string();
  const auto result = run_experiment(cfg);
  EXPECT_EQ(result.exit_code, 0);
  for (const auto& rec : result.report.rounds) EXPECT_EQ(rec.participants.size(), 1u);
}

TEST(RunBounds, SingleHorizonRow) {
  auto cfg = parse("features = 3\nrows = 64\nrelevant = 0,1\nlabel_rule = xor\nsamples = 4\n"
                   "alpha_mode = schedule\nhorizon_min = 1\nhorizon_max = 1\ntrials = 100\n");
  cfg.out_dir = fresh_dir("bounds1").string();
  const auto rows = run_bounds(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(read_rows(fs::path(cfg.out_dir) / "bounds.csv").size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].bound, 1.0 - 0.125);
}

TEST(RunBounds, StationaryBoundColumnNonIncreasing) {
  auto cfg = parse("features = 3\nrows = 64\nrelevant = 0,1\nlabel_rule = xor\nsamples = 4\n"
                   "alpha = 0\nhorizon_min = 1\nhorizon_max = 6\ntrials = 100\n");
  cfg.out_dir = fresh_dir("bounds0").string();
  const auto rows = run_bounds(cfg);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].bound, rows[i - 1].bound);
}

TEST(RunBounds, MonteCarloBelowBoundRowWise) {
  auto cfg = parse("features = 3\nrows = 64\nrelevant = 0,1\nlabel_rule = xor\nsamples = 4\n"
                   "alpha_mode = schedule\nhorizon_min = 1\nhorizon_max = 5\ntrials = 300\n");
  cfg.out_dir = fresh_dir("bounds_mc").string();
  cfg.threads = 4;
  for (const auto& row : run_bounds(cfg)) {
    const double sigma = std::sqrt(row.bound * (1 - row.bound) / 300.0);
    EXPECT_LE(row.monte_carlo_rate, row.bound + 3 * sigma) << "t'=" << row.horizon;
  }
}

TEST(GenPlanted, WritesLoadableCsv) {
  auto cfg = parse(kSmallPlanted);
  cfg.out_dir = fresh_dir("gen").string();
  const auto path = generate_planted_csv(cfg);
  DiscretizationSpec codes;
  codes.strategy = BinningStrategy::integer;
  EXPECT_EQ(load_csv(path, "label", codes), build_dataset(cfg));

  // The written file can drive a csv-sourced run.
  auto from_csv = parse(std::string(kSmallPlanted) + "dataset = csv\ncsv_path = " + path + "\n");
  from_csv.out_dir = fresh_dir("gen_run").string();
  EXPECT_EQ(build_dataset(from_csv), build_dataset(cfg));
}
