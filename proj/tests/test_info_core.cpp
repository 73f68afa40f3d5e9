#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fedfs/info_core.hpp"
#include "oracles.hpp"

using namespace fedfs;

namespace {

std::vector<Code> codes_of_column(const std::vector<double>& column, std::size_t bins) {
  std::vector<std::vector<double>> rows;
  for (double v : column) rows.push_back({v});
  DiscretizationSpec spec;
  spec.default_bins = bins;
  std::vector<Code> out;
  for (const auto& r : discretize(rows, spec)) out.push_back(r[0]);
  return out;
}

}  // namespace

TEST(Discretize, TwoPointExtremes) {
  EXPECT_EQ(codes_of_column({0.0, 1.0}, 2), (std::vector<Code>{0, 1}));
}

TEST(Discretize, ConstantColumnMapsToZero) {
  EXPECT_EQ(codes_of_column({5.0, 5.0, 5.0}, 4), (std::vector<Code>{0, 0, 0}));
}

TEST(Discretize, MidpointGoesToUpperBin) {
  EXPECT_EQ(codes_of_column({0.0, 0.49, 0.51, 1.0}, 2), (std::vector<Code>{0, 0, 1, 1}));
  EXPECT_EQ(codes_of_column({0.0, 0.5, 1.0}, 2), (std::vector<Code>{0, 1, 1}));
}

TEST(Discretize, CodesStayBelowBinCount) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> dist;
  std::vector<double> col(500);
  for (auto& v : col) v = dist(gen);
  for (std::size_t bins : {2u, 3u, 10u, 17u}) {
    const auto codes = codes_of_column(col, bins);
    EXPECT_LT(*std::max_element(codes.begin(), codes.end()), bins);
    // Column extremes land in the outer bins.
    const auto lo = std::min_element(col.begin(), col.end()) - col.begin();
    const auto hi = std::max_element(col.begin(), col.end()) - col.begin();
    EXPECT_EQ(codes[lo], 0u);
    EXPECT_EQ(codes[hi], bins - 1);
  }
}

TEST(Discretize, NonFiniteValueNamesColumn) {
  std::vector<std::vector<double>> rows{{0.0, 1.0, 2.0}, {1.0, std::nan(""), 3.0}};
  try {
    discretize(rows, DiscretizationSpec{});
    FAIL() << "expected rejection";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos) << e.what();
  }
  rows[1][1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(discretize(rows, DiscretizationSpec{}), InvalidArgument);
}

TEST(Discretize, PerFeatureBinsMustMatchWidth) {
  DiscretizationSpec spec;
  spec.bins = {2, 2, 2};
  EXPECT_THROW(discretize({{0.0, 1.0}}, spec), InvalidArgument);
}

TEST(Discretize, IntegerStrategyPassesCodesThrough) {
  DiscretizationSpec spec;
  spec.strategy = BinningStrategy::integer;
  const auto out = discretize({{0.0, 7.0}, {1.0, 3.0}}, spec);
  EXPECT_EQ(out, (std::vector<std::vector<Code>>{{0, 7}, {1, 3}}));
  EXPECT_THROW(discretize({{0.5, 1.0}}, spec), InvalidArgument);
}

TEST(Discretize, AutomaticStrategyMixesRules) {
  DiscretizationSpec spec;
  spec.strategy = BinningStrategy::automatic;
  spec.default_bins = 2;
  const auto out = discretize({{0.0, 0.0}, {1.0, 0.25}, {1.0, 1.0}}, spec);
  // Column 0 is integer valued and kept; column 1 is binned.
  EXPECT_EQ(out, (std::vector<std::vector<Code>>{{0, 0}, {1, 0}, {1, 1}}));
}

TEST(Entropy, Examples) {
  EXPECT_DOUBLE_EQ(entropy({0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(entropy({7, 7, 7, 7}), 0.0);
  EXPECT_NEAR(entropy({0, 0, 0, 1}), -0.75 * std::log2(0.75) - 0.25 * std::log2(0.25), 1e-15);
  EXPECT_NEAR(entropy({0, 0, 0, 1}), 0.811278, 1e-6);
}

TEST(Entropy, EmptyRejected) {
  std::vector<Code> empty;
  EXPECT_THROW(entropy(std::span<const Code>(empty)), InvalidArgument);
}

TEST(Entropy, BoundedByLogDistinct) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<Code> d(0, 1 + trial % 9);
    std::vector<Code> v(1 + trial % 40);
    for (auto& x : v) x = d(gen);
    const double h = entropy(std::span<const Code>(v));
    std::vector<Code> distinct = v;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(distinct.size())) + 1e-12);
    EXPECT_NEAR(h, oracle::entropy(v), 1e-12);
  }
}

TEST(ConditionalEntropy, XorExamples) {
  const auto d = fixtures::xor_dataset();
  EXPECT_DOUBLE_EQ(conditional_entropy(d, {1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(conditional_entropy(d, {0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(conditional_entropy(d, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(conditional_entropy(d, {0, 1}), 1.0);
}

TEST(ConditionalEntropy, MaskLengthMismatchRejected) {
  const auto d = fixtures::xor_dataset();
  EXPECT_THROW(conditional_entropy(d, {1, 1, 0}), InvalidArgument);
  EXPECT_THROW(mutual_information(d, {1}), InvalidArgument);
}

TEST(MutualInformation, XorExamples) {
  const auto d = fixtures::xor_dataset();
  EXPECT_DOUBLE_EQ(mutual_information(d, {1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(mutual_information(d, {1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(mutual_information(d, {0, 0}), 0.0);
}

TEST(MutualInformation, EmptyMaskIsZeroOnRandomData) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = fixtures::random_dataset(gen, 30, 4, 3, 4);
    EXPECT_EQ(mutual_information(d, FeatureMask::none(4)), 0.0);
  }
}

// Brute-force equivalence, chain consistency and range on every mask of many
// small random datasets.
TEST(InfoCoreProperties, MatchesJointCountOracle) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + gen() % 64;
    const std::size_t m = 1 + gen() % 6;
    const Code card = static_cast<Code>(1 + gen() % 4);
    const Code label_card = static_cast<Code>(1 + gen() % 4);
    const auto d = fixtures::random_dataset(gen, n, m, card, label_card);
    const double h_y = entropy(d.labels());
    EXPECT_NEAR(h_y, oracle::entropy({d.labels().begin(), d.labels().end()}), 1e-12);
    for (std::uint64_t code = 0; code < (1u << m); ++code) {
      const auto mask = fixtures::mask_from_code(m, code);
      const double h = conditional_entropy(d, mask);
      ASSERT_NEAR(h, oracle::conditional_entropy(d, mask), 1e-12) << "n=" << n << " m=" << m;
      EXPECT_GE(h, 0.0);
      EXPECT_LE(h, h_y);
      const double mi = mutual_information(d, mask);
      EXPECT_GE(mi, 0.0);
      if (h_y - h >= 0.0) EXPECT_EQ(mi, h_y - h);
    }
  }
}

TEST(InfoCoreProperties, AddingFeatureNeverIncreasesConditionalEntropy) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + gen() % 5;
    const auto d = fixtures::random_dataset(gen, 5 + gen() % 60, m, 3, 3);
    for (std::uint64_t code = 0; code < (1u << m); ++code) {
      const double base = conditional_entropy(d, fixtures::mask_from_code(m, code));
      for (std::size_t i = 0; i < m; ++i) {
        if ((code >> i) & 1u) continue;
        const double more = conditional_entropy(d, fixtures::mask_from_code(m, code | (1u << i)));
        EXPECT_LE(more, base + 1e-12);
      }
    }
  }
}

TEST(InfoCoreProperties, RowPermutationInvariance) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + gen() % 5;
    const auto d = fixtures::random_dataset(gen, 2 + gen() % 60, m, 4, 3);
    std::vector<std::size_t> order(d.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), gen);
    const auto shuffled = d.select_rows(order);
    EXPECT_NEAR(entropy(d.labels()), entropy(shuffled.labels()), 1e-12);
    for (std::uint64_t code = 0; code < (1u << m); ++code) {
      const auto mask = fixtures::mask_from_code(m, code);
      EXPECT_NEAR(conditional_entropy(d, mask), conditional_entropy(shuffled, mask), 1e-12);
      EXPECT_NEAR(mutual_information(d, mask), mutual_information(shuffled, mask), 1e-12);
    }
  }
}

TEST(InfoCoreProperties, LargeCodesUseSparseGrouping) {
  // Cardinalities near 2^31 force the hashed grouping path.
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<Code> big(0, 5);
  std::vector<std::vector<Code>> rows(200, std::vector<Code>(3));
  std::vector<Code> labels(200);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r] = {big(gen) * 400'000'000u, big(gen), big(gen) + 2'000'000'000u};
    labels[r] = static_cast<Code>(gen() % 3);
  }
  const DiscreteDataset d(rows, labels);
  for (std::uint64_t code = 0; code < 8; ++code) {
    const auto mask = fixtures::mask_from_code(3, code);
    EXPECT_NEAR(conditional_entropy(d, mask), oracle::conditional_entropy(d, mask), 1e-12);
  }
}

TEST(DiscreteDatasetType, RejectsInconsistentShapes) {
  EXPECT_THROW(DiscreteDataset({{0, 1}, {1}}, {0, 1}), InvalidArgument);
  EXPECT_THROW(DiscreteDataset({{0, 1}}, {0, 1}), InvalidArgument);
  EXPECT_THROW(DiscreteDataset({}, {}), InvalidArgument);
  EXPECT_THROW(DiscreteDataset({{0, 1}}, {0}, {"only_one"}), InvalidArgument);
}

TEST(DiscreteDatasetType, DefaultNamesAndCardinality) {
  const auto d = fixtures::xor_dataset();
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"f0", "f1"}));
  EXPECT_EQ(d.cardinality(0), 2u);
  EXPECT_EQ(d.label_cardinality(), 2u);
}

TEST(FeatureMaskType, IndexHelpers) {
  const auto mask = FeatureMask::from_indices(5, {1, 3});
  EXPECT_EQ(mask, (FeatureMask{0, 1, 0, 1, 0}));
  EXPECT_EQ(mask.count(), 2u);
  EXPECT_EQ(mask.indices(), (std::vector<std::size_t>{1, 3}));
  EXPECT_THROW(FeatureMask::from_indices(3, {3}), InvalidArgument);
}
