#include <cmath>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "ews/panel_data.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ews;
using testutil::throws_code;

namespace {

GeneratorConfig small_config(std::uint64_t seed = 42, int households = 60) {
  GeneratorConfig c;
  c.seed = seed;
  c.n_households = households;
  return c;
}

std::vector<double> column_of(const PanelDataset& data, Indicator ind) {
  std::vector<double> out;
  for (const auto& r : data.records) {
    if (!std::isnan(r.value(ind))) out.push_back(r.value(ind));
  }
  return out;
}

}  // namespace

TEST(Generator, SeedFortyTwoHasSevenFiftyHouseholdsPerRound) {
  const auto data = generate_synthetic(GeneratorConfig{});
  ASSERT_EQ(data.size(), 2250u);
  for (int round = 1; round <= 3; ++round) {
    std::size_t n = 0;
    for (const auto& r : data.records) n += r.round == round;
    EXPECT_EQ(n, 750u) << "round " << round;
  }
  EXPECT_NO_THROW(validate(data));
}

TEST(Generator, SameSeedGivesByteIdenticalData) {
  const auto a = generate_synthetic(small_config());
  const auto b = generate_synthetic(small_config());
  EXPECT_EQ(a, b);
  EXPECT_EQ(format_panel_csv(a), format_panel_csv(b));
  EXPECT_NE(format_panel_csv(a), format_panel_csv(generate_synthetic(small_config(43))));
}

TEST(Generator, BorrowingRateIsRightSkewed) {
  const auto data = generate_synthetic(small_config(7, 100));
  ASSERT_EQ(data.size(), 300u);
  const auto v = column_of(data, Indicator::kHouseholdBorrowingRate);
  EXPECT_GT(oracle::moment_skewness(v), 0.5);
  EXPECT_NEAR(skewness(v), oracle::moment_skewness(v), 1e-12);
}

TEST(Generator, DisasterImpactCorrelatesWithDistress) {
  const auto data = generate_synthetic(GeneratorConfig{});
  std::vector<double> impact, label;
  for (const auto& r : data.records) {
    impact.push_back(r.value(Indicator::kDisasterImpact));
    label.push_back(r.distress_label);
  }
  EXPECT_GT(oracle::direct_pearson(impact, label), 0.2);
  const auto eda = summarize(data);
  EXPECT_NEAR(*eda.correlation_between("disaster_impact", "distress_label"),
              oracle::direct_pearson(impact, label), 1e-12);
}

TEST(Generator, MediumIsTheModalDisasterLevelAndDistressIsTheMinority) {
  const auto data = generate_synthetic(GeneratorConfig{});
  int counts[3] = {0, 0, 0};
  int distressed = 0;
  for (const auto& r : data.records) {
    if (r.disaster_level) ++counts[static_cast<int>(*r.disaster_level)];
    distressed += r.distress_label;
  }
  EXPECT_GT(counts[1], counts[0]);
  EXPECT_GT(counts[1], counts[2]);
  EXPECT_LT(distressed * 2, static_cast<int>(data.size()));
}

TEST(Generator, MissingFractionMasksCells) {
  auto c = small_config();
  c.missing_fraction = 0.1;
  const auto data = generate_synthetic(c);
  std::size_t missing = 0, cells = 0;
  for (const auto& r : data.records) {
    for (double v : r.indicators) {
      missing += std::isnan(v);
      ++cells;
    }
  }
  EXPECT_GT(missing, cells / 20);
  EXPECT_LT(missing, cells / 5);
}

TEST(Generator, InvalidConfigNamesTheBound) {
  auto c = small_config();
  c.n_households = 0;
  EXPECT_TRUE(throws_code([&] { generate_synthetic(c); }, ErrorCode::kConfig, "n_households"));
  c = small_config();
  c.prevalence_target = 1.5;
  EXPECT_TRUE(throws_code([&] { generate_synthetic(c); }, ErrorCode::kConfig, "prevalence_target"));
}

TEST(PanelCsv, RoundTripsToAnEqualDataset) {
  testutil::TempDir dir;
  auto c = small_config();
  c.missing_fraction = 0.05;
  const auto data = generate_synthetic(c);
  write_panel_csv(data, dir / "panel.csv");
  EXPECT_EQ(read_panel_csv(dir / "panel.csv"), data);
}

TEST(PanelCsv, WriteReadWriteIsIdempotent) {
  testutil::TempDir dir;
  const auto data = generate_synthetic(small_config());
  write_panel_csv(data, dir / "a.csv");
  write_panel_csv(read_panel_csv(dir / "a.csv"), dir / "b.csv");
  EXPECT_EQ(testutil::slurp(dir / "a.csv"), testutil::slurp(dir / "b.csv"));
}

TEST(PanelCsv, LineCountIsRowsPlusHeader) {
  const auto text = format_panel_csv(generate_synthetic(GeneratorConfig{}));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2251);
}

TEST(PanelCsv, EmptyDatasetIsHeaderOnly) {
  EXPECT_EQ(format_panel_csv(PanelDataset{}), panel_csv_header() + "\n");
}

TEST(PanelCsv, MissingColumnIsASchemaErrorNamingIt) {
  const auto text = format_panel_csv(generate_synthetic(small_config()));
  // Drop the inflation column (fourth field) from every line.
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    std::string line = text.substr(start, end - start);
    const auto a = line.find(',', line.find(',', line.find(',') + 1) + 1);
    const auto b = line.find(',', a + 1);
    line.erase(a, b - a);
    out += line + "\n";
    start = end + 1;
  }
  EXPECT_TRUE(throws_code([&] { parse_panel_csv(out); }, ErrorCode::kSchema, "inflation"));
}

TEST(PanelCsv, DuplicateKeyCitesHouseholdAndRound) {
  const auto data = generate_synthetic(small_config());
  std::string text = format_panel_csv(data);
  const auto pos = text.find("\n17,2,");
  ASSERT_NE(pos, std::string::npos);
  text += text.substr(pos + 1, text.find('\n', pos + 1) - pos);
  EXPECT_TRUE(throws_code([&] { parse_panel_csv(text); }, ErrorCode::kIntegrity, "household 17, round 2"));
}

TEST(PanelCsv, UnparseableCellIsRowAddressed) {
  std::string text = format_panel_csv(generate_synthetic(small_config()));
  const auto line3 = text.find('\n', text.find('\n', text.find('\n') + 1) + 1);
  const auto field = text.find(',', text.find(',', line3 + 1) + 1);
  text.insert(field + 1, "abc");
  EXPECT_TRUE(throws_code([&] { parse_panel_csv(text); }, ErrorCode::kParse, "line 4"));
}

TEST(PanelCsv, UnknownLevelIsAnEncodingError) {
  EXPECT_TRUE(throws_code([] { parse_level("Extreme"); }, ErrorCode::kEncoding));
  EXPECT_EQ(parse_level("Medium"), Level::kMedium);
}

TEST(PanelCsv, UnreadableAndUnwritablePathsAreIoErrors) {
  EXPECT_TRUE(throws_code([] { read_panel_csv("/nonexistent/panel.csv"); }, ErrorCode::kIo));
  EXPECT_TRUE(throws_code([] { write_panel_csv(PanelDataset{}, "/nonexistent/dir/panel.csv"); },
                          ErrorCode::kIo));
}

TEST(Validate, RejectsAGapInAHouseholdsRounds) {
  auto data = generate_synthetic(small_config());
  data.records.erase(data.records.begin() + 1);
  EXPECT_TRUE(throws_code([&] { validate(data); }, ErrorCode::kIntegrity));
}

TEST(Summarize, ConstantColumnHasZeroSdAndUndefinedCorrelation) {
  auto data = generate_synthetic(small_config());
  for (auto& r : data.records) r.value(Indicator::kGdpGrowth) = 1.5;
  const auto eda = summarize(data);
  const auto it = std::find_if(eda.numeric.begin(), eda.numeric.end(),
                               [](const auto& s) { return s.name == "gdp_growth"; });
  ASSERT_NE(it, eda.numeric.end());
  EXPECT_EQ(it->sd, 0.0);
  EXPECT_FALSE(eda.correlation_between("gdp_growth", "inflation").has_value());
  EXPECT_FALSE(eda.correlation_between("gdp_growth", "distress_label").has_value());
}

TEST(Summarize, SelfCorrelationIsOne) {
  const auto eda = summarize(generate_synthetic(small_config()));
  for (const auto& name : eda.correlation_columns) {
    EXPECT_NEAR(*eda.correlation_between(name, name), 1.0, 1e-12) << name;
  }
}

TEST(Summarize, EmptyDatasetIsADomainError) {
  EXPECT_TRUE(throws_code([] { summarize(PanelDataset{}); }, ErrorCode::kDomain));
}

TEST(Summarize, HistogramCountsMatchNonMissingCells) {
  const auto eda = summarize(generate_synthetic(small_config()));
  for (const auto& s : eda.numeric) {
    std::size_t total = 0;
    for (auto c : s.histogram) total += c;
    EXPECT_EQ(total, s.count) << s.name;
    EXPECT_EQ(s.histogram.size(), static_cast<std::size_t>(kHistogramBins));
  }
}

TEST(SeverityDrivers, AreOrderedByAbsoluteWeight) {
  const auto d = severity_drivers();
  ASSERT_FALSE(d.empty());
  for (std::size_t i = 1; i < d.size(); ++i) {
    EXPECT_GE(std::abs(d[i - 1].weight), std::abs(d[i].weight));
  }
}
