#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "ews/features.hpp"
#include "ews/panel_data.hpp"
#include "test_util.hpp"

using namespace ews;
using testutil::throws_code;

namespace {

PanelDataset small_panel(int households = 10, int rounds = 3, std::uint64_t seed = 5) {
  GeneratorConfig c;
  c.seed = seed;
  c.n_households = households;
  c.n_rounds = rounds;
  return generate_synthetic(c);
}

// Index of (household, round) in a sorted panel.
std::size_t at(const PanelDataset& data, std::int64_t h, int r) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.records[i].household_id == h && data.records[i].round == r) return i;
  }
  throw std::runtime_error("no such key");
}

void set_series(PanelDataset& data, Indicator ind, std::int64_t h, std::vector<double> values) {
  for (std::size_t r = 0; r < values.size(); ++r) {
    data.records[at(data, h, static_cast<int>(r) + 1)].value(ind) = values[r];
  }
}

std::vector<double> series(const KeyedColumns& cols, const std::string& name, std::int64_t h) {
  std::vector<double> out;
  const auto& col = cols.column(name);
  for (std::size_t i = 0; i < cols.keys.size(); ++i) {
    if (cols.keys[i].household_id == h) out.push_back(col[i]);
  }
  return out;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Randomizes every indicator, level and label of rows with round > r.
void scramble_after(PanelDataset& data, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (auto& rec : data.records) {
    if (rec.round <= r) continue;
    for (std::size_t k = 0; k < kNumIndicators; ++k) {
      const auto ind = static_cast<Indicator>(k);
      double v = u(rng);
      if (is_count_indicator(ind)) v = std::floor(v);
      if (auto hi = indicator_upper_bound(ind)) v = std::min(v, *hi);
      rec.indicators[k] = v;
    }
    rec.disaster_level = static_cast<Level>(rng() % 3);
    rec.distress_label = static_cast<int>(rng() % 2);
    rec.severity_label = static_cast<Level>(rng() % 3);
  }
}

}  // namespace

TEST(Ordinal, EncodesLevelsInOrder) {
  EXPECT_EQ(ordinal_encode_severity("Low"), 0);
  EXPECT_EQ(ordinal_encode_severity("High"), 2);
  EXPECT_LT(ordinal_encode_severity("Medium"), ordinal_encode_severity("High"));
  EXPECT_TRUE(throws_code([] { ordinal_encode_severity("Severe"); }, ErrorCode::kEncoding));
}

TEST(Lags, OneRoundLagWithFirstRoundImputedAndFlagged) {
  auto data = small_panel();
  const auto h = data.records.front().household_id;
  set_series(data, Indicator::kInflation, h, {4.0, 5.0, 6.0});
  const auto cols = add_lags(data, {"inflation"});
  EXPECT_EQ(series(cols, "lag_inflation", h), (std::vector<double>{4.0, 4.0, 5.0}));
  EXPECT_EQ(series(cols, "lag_inflation_missing", h), (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(Lags, SingleRoundPanelFlagsEveryLag) {
  std::vector<HouseholdRecord> first;
  for (const auto& r : small_panel().records) {
    if (r.round == 1) first.push_back(r);
  }
  const auto data = make_panel(first);
  const auto cols = add_lags(data, {"inflation", "gdp_growth"});
  for (double f : cols.column("lag_inflation_missing")) EXPECT_EQ(f, 1.0);
  for (double f : cols.column("lag_gdp_growth_missing")) EXPECT_EQ(f, 1.0);
}

TEST(Lags, UnknownColumnIsASchemaError) {
  EXPECT_TRUE(throws_code([] { add_lags(small_panel(), {"wealth"}); }, ErrorCode::kSchema, "wealth"));
}

TEST(Rolling, TwoPointWindowUsesSampleSd) {
  auto data = small_panel();
  const auto h = data.records.front().household_id;
  set_series(data, Indicator::kInflation, h, {1.0, 3.0, 3.0});
  const auto cols = add_rolling(data, {"inflation"}, 2);
  const auto mu = series(cols, "roll_mean_inflation", h);
  const auto sd = series(cols, "roll_sd_inflation", h);
  EXPECT_EQ(mu[0], 1.0);
  EXPECT_EQ(sd[0], 0.0);
  EXPECT_DOUBLE_EQ(mu[1], 2.0);
  EXPECT_NEAR(sd[1], 1.414214, 1e-6);
  EXPECT_NEAR(sd[1], std::sqrt(((1.0 - 2.0) * (1.0 - 2.0) + (3.0 - 2.0) * (3.0 - 2.0)) / 1.0), 1e-15);
  EXPECT_EQ(sd[2], 0.0);
}

TEST(Rolling, ConstantSeriesHasZeroSd) {
  auto data = small_panel();
  const auto h = data.records.back().household_id;
  set_series(data, Indicator::kInflation, h, {2.5, 2.5, 2.5});
  for (double s : series(add_rolling(data, {"inflation"}, 3), "roll_sd_inflation", h)) EXPECT_EQ(s, 0.0);
}

TEST(Rolling, WindowBelowTwoIsAConfigError) {
  EXPECT_TRUE(throws_code([] { add_rolling(small_panel(), {"inflation"}, 1); }, ErrorCode::kConfig));
}

TEST(Velocity, FirstDifferencesWithFlaggedFirstRound) {
  auto data = small_panel();
  const auto h = data.records.front().household_id;
  set_series(data, Indicator::kInflation, h, {10.0, 12.0, 15.0});
  const auto cols = add_velocity(data, {"inflation"});
  EXPECT_EQ(series(cols, "vel_inflation", h), (std::vector<double>{0.0, 2.0, 3.0}));
  EXPECT_EQ(series(cols, "vel_inflation_missing", h), (std::vector<double>{1.0, 0.0, 0.0}));
  set_series(data, Indicator::kInflation, h, {7.0, 7.0, 7.0});
  EXPECT_EQ(series(add_velocity(data, {"inflation"}), "vel_inflation", h), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Interactions, ProductsAndSquares) {
  auto data = small_panel();
  const auto h = data.records.front().household_id;
  set_series(data, Indicator::kDisasterImpact, h, {2.0, 2.0, 2.0});
  set_series(data, Indicator::kHouseholdBorrowingRate, h, {3.0, 0.0, 2.5});
  FeatureRecipe recipe;
  recipe.interactions = {{"disaster_impact", "household_borrowing_rate"}};
  recipe.squared_columns = {"household_borrowing_rate"};
  const auto cols = add_interactions(data, recipe);
  EXPECT_EQ(series(cols, "disaster_impact_x_household_borrowing_rate", h)[0], 6.0);
  const auto sq = series(cols, "household_borrowing_rate_sq", h);
  EXPECT_EQ(sq[1], 0.0);
  EXPECT_EQ(sq[2], 6.25);
}

TEST(Interactions, CategoricalColumnIsATypeError) {
  FeatureRecipe recipe;
  recipe.interactions = {{"disaster_level", "inflation"}};
  EXPECT_TRUE(throws_code([&] { add_interactions(small_panel(), recipe); }, ErrorCode::kType));
  EXPECT_TRUE(throws_code([&] { recipe.validate(); }, ErrorCode::kType));
}

TEST(Transforms, ImputationMedianIsFittedOnTrainingRounds) {
  auto full = small_panel();
  full.records.resize(9);  // three households
  auto data = make_panel(full.records);
  std::int64_t ids[3];
  for (int i = 0; i < 3; ++i) ids[i] = data.records[static_cast<std::size_t>(i) * 3].household_id;
  const double train_values[3] = {1.0, 2.0, 100.0};
  for (int i = 0; i < 3; ++i) {
    data.records[at(data, ids[i], 1)].value(Indicator::kGdpGrowth) = train_values[i];
  }
  data.records[at(data, ids[0], 2)].value(Indicator::kGdpGrowth) = std::nan("");
  const auto state = fit_transforms(data, FeatureRecipe{}, {1});
  const auto& col = *std::find_if(state.columns.begin(), state.columns.end(),
                                  [](const auto& c) { return c.name == "gdp_growth"; });
  EXPECT_EQ(col.impute_value, 2.0);

  const auto m = build_feature_matrix(state, data);
  const auto row = std::find_if(m.keys.begin(), m.keys.end(),
                                [&](const Key& k) { return k.household_id == ids[0] && k.round == 2; }) -
                   m.keys.begin();
  EXPECT_NEAR(m.values(row, m.column_index("gdp_growth")), (2.0 - col.mean) / col.sd, 1e-12);
  EXPECT_EQ(m.values(row, m.column_index("gdp_growth_missing")), 1.0);
}

TEST(Transforms, ConstantColumnIsFlaggedAndZero) {
  auto data = small_panel();
  for (auto& r : data.records) r.value(Indicator::kFxChange) = 3.0;
  const auto state = fit_transforms(data, FeatureRecipe{}, {1});
  const auto it = std::find_if(state.columns.begin(), state.columns.end(),
                               [](const auto& c) { return c.name == "fx_change"; });
  EXPECT_TRUE(it->constant);
  const auto m = build_feature_matrix(state, data);
  for (double v : m.values.column(m.column_index("fx_change"))) EXPECT_EQ(v, 0.0);
}

TEST(Transforms, TrainingSliceIsStandardized) {
  const auto data = generate_synthetic(GeneratorConfig{});
  const auto state = fit_transforms(data, FeatureRecipe::defaults(), {1});
  const auto m = build_feature_matrix(state, data);
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m.keys[i].round == 1) train.push_back(i);
  }
  const auto t = m.values.select_rows(train);
  for (std::size_t c = 0; c < state.columns.size(); ++c) {
    const auto col = t.column(c);
    EXPECT_LE(std::abs(mean(col)), 1e-9) << m.column_names[c];
    if (!state.columns[c].constant) {
      EXPECT_NEAR(population_sd(col), 1.0, 1e-9) << m.column_names[c];
    }
  }
}

TEST(Transforms, ApplyingTwiceIsIdentical) {
  const auto data = small_panel(40);
  const auto state = fit_transforms(data, FeatureRecipe::defaults(), {1});
  const auto a = build_feature_matrix(state, data);
  const auto b = build_feature_matrix(state, data);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.column_names, b.column_names);
}

TEST(Transforms, UnseenLevelFallsBackToModeWithWarning) {
  auto data = small_panel(30);
  for (auto& r : data.records) {
    if (r.round == 1 && r.disaster_level == Level::kHigh) r.disaster_level = Level::kMedium;
  }
  data.records[at(data, data.records.front().household_id, 2)].disaster_level = Level::kHigh;
  const auto state = fit_transforms(data, FeatureRecipe{}, {1});
  const auto m = build_feature_matrix(state, data);
  EXPECT_FALSE(m.warnings.empty());
  const auto row = at(data, data.records.front().household_id, 2);
  EXPECT_EQ(m.values(row, m.column_index("disaster_level_missing")), 1.0);
}

TEST(Transforms, EmptyTrainingSliceIsADomainError) {
  EXPECT_TRUE(throws_code([] { fit_transforms(small_panel(), FeatureRecipe{}, {}); }, ErrorCode::kDomain));
  EXPECT_TRUE(throws_code([] { fit_transforms(small_panel(), FeatureRecipe{}, {9}); }, ErrorCode::kDomain));
}

TEST(Transforms, FlagColumnsTrail) {
  const auto data = small_panel(20);
  const auto m = build_feature_matrix(fit_transforms(data, FeatureRecipe::defaults(), {1}), data);
  ASSERT_GT(m.n_flag_columns, 0u);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const bool flag = m.column_names[c].ends_with("_missing");
    EXPECT_EQ(flag, c >= m.cols() - m.n_flag_columns) << m.column_names[c];
  }
}

TEST(Leakage, FutureMutationsLeaveEarlierRowsBitwiseIdentical) {
  const auto data = generate_synthetic(GeneratorConfig{});
  const auto recipe = FeatureRecipe::defaults();
  const auto state = fit_transforms(data, recipe, {1});
  const auto base = build_feature_matrix(state, data);
  for (int r = 1; r <= 2; ++r) {
    auto mutated = data;
    scramble_after(mutated, r, 100 + r);
    const auto m = build_feature_matrix(state, mutated);
    ASSERT_EQ(m.keys, base.keys);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (m.keys[i].round > r) continue;
      ASSERT_TRUE(bitwise_equal(m.values.row(i), base.values.row(i)))
          << "row " << i << " round " << m.keys[i].round << " after mutating rounds > " << r;
    }
  }
}

TEST(Leakage, TransformStateIgnoresLaterRounds) {
  const auto data = generate_synthetic(GeneratorConfig{});
  const auto state = fit_transforms(data, FeatureRecipe::defaults(), {1});
  auto mutated = data;
  scramble_after(mutated, 1, 7);
  EXPECT_EQ(fit_transforms(mutated, FeatureRecipe::defaults(), {1}), state);
}

TEST(FeatureCsv, RoundTripMatchesCsvPrecision) {
  testutil::TempDir dir;
  const auto data = small_panel(25);
  const auto m = build_feature_matrix(fit_transforms(data, FeatureRecipe::defaults(), {1}), data);
  write_feature_csv(m, dir / "f.csv");
  const auto back = read_feature_csv(dir / "f.csv");
  const auto rounded = at_csv_precision(m);
  EXPECT_EQ(back.values, rounded.values);
  EXPECT_EQ(back.column_names, m.column_names);
  EXPECT_EQ(back.keys, m.keys);
  EXPECT_EQ(back.target_binary, m.target_binary);
  EXPECT_EQ(back.target_severity, m.target_severity);
  EXPECT_EQ(back.n_flag_columns, m.n_flag_columns);
  EXPECT_EQ(format_feature_csv(back), format_feature_csv(m));
}

TEST(TransformState, JsonRoundTrip) {
  const auto data = small_panel(25);
  const auto state = fit_transforms(data, FeatureRecipe::defaults(), {1, 2});
  const auto text = transform_state_to_json(state);
  EXPECT_EQ(transform_state_from_json(text), state);
  EXPECT_EQ(transform_state_to_json(transform_state_from_json(text)), text);
  EXPECT_TRUE(throws_code([] { transform_state_from_json("{\"format\": \"other\"}"); }, ErrorCode::kSchema));
}

TEST(Recipe, ValidationCatchesBadNamesAndWindows) {
  auto r = FeatureRecipe::defaults();
  r.lag_columns.push_back("nope");
  EXPECT_TRUE(throws_code([&] { r.validate(); }, ErrorCode::kSchema, "nope"));
  r = FeatureRecipe::defaults();
  r.rolling_window = 4;
  EXPECT_TRUE(throws_code([&] { r.validate(3); }, ErrorCode::kConfig));
  EXPECT_NO_THROW(r.validate());
}
