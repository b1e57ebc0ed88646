#include <cmath>
#include <limits>
#include <random>

#include "test_util.hpp"

using namespace bldgcast;

namespace {

/// One row per grid step from `start` over `days` days; energy encodes the
/// row index so lag sources can be read back from the values.
AlignedDataset grid_days(Timestamp start, int days, const std::vector<double>& day_calendar, std::int64_t grid = 600) {
  AlignedDataset d;
  d.grid_interval = grid;
  const int per_day = static_cast<int>(kSecondsPerDay / grid);
  for (int i = 0; i < days * per_day; ++i) {
    AlignedRow r;
    r.time = start + grid * i;
    r.energy = i;
    r.occupancy = i % 7;
    r.temperature = 20 + (i % 11);
    r.humidity = 50 + (i % 5);
    r.calendar = day_calendar[static_cast<std::size_t>(i / per_day)];
    d.rows.push_back(r);
  }
  return d;
}

}  // namespace

TEST(Scaler, EnergyColumnFromTableStatistics) {
  AlignedDataset d;
  d.grid_interval = 600;
  for (double e : {0.0, 746.6, 26501.1, 1200.0}) d.rows.push_back({static_cast<Timestamp>(d.rows.size() * 600), e, 1, 20, 50, 1});
  const auto p = fit_scaler(d);
  EXPECT_EQ(p.columns[0].min, 0.0);
  EXPECT_EQ(p.columns[0].max, 26501.1);
  EXPECT_NEAR(p.columns[0].scale(746.6), 0.028172, 5e-7);
  EXPECT_NEAR(p.columns[0].scale(746.6), 746.6 / 26501.1, 1e-15);
  EXPECT_EQ(p.columns[0].scale(0.0), 0.0);
  EXPECT_EQ(p.columns[0].scale(26501.1), 1.0);
}

TEST(Scaler, DegenerateAndSingleRow) {
  AlignedDataset d;
  d.grid_interval = 600;
  d.rows.push_back({0, 5, 3, 20, 50, 1});
  const auto p = fit_scaler(d);
  for (std::size_t c = 0; c < kNumColumns; ++c) {
    EXPECT_EQ(p.columns[c].min, p.columns[c].max);
    EXPECT_EQ(p.columns[c].scale(123.0), 0.0);
  }
  EXPECT_EQ(p.columns[0].min, 5.0);
  EXPECT_ERROR_CODE(fit_scaler(AlignedDataset{}), ErrorCode::EmptyInput);
}

TEST(Scaler, RoundTripAndTrainRange) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1000, 1000);
  AlignedDataset d;
  d.grid_interval = 600;
  for (int i = 0; i < 200; ++i) d.rows.push_back({600 * i, u(rng), u(rng), u(rng), u(rng), static_cast<double>(i % 2)});
  const auto split = chronological_split(d);
  const auto p = fit_scaler(slice_rows(d, split.train.begin, split.train.end));
  const auto t = transform(d, p);
  for (std::size_t i = split.train.begin; i < split.train.end; ++i) {
    for (double v : row_values(t.rows[i])) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  const auto back = inverse_transform(t, p);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto a = row_values(d.rows[i]);
    const auto b = row_values(back.rows[i]);
    for (std::size_t c = 0; c < kNumColumns; ++c) EXPECT_NEAR(a[c], b[c], 1e-12 * (1 + std::abs(a[c])));
  }
}

TEST(Split, TableCountAndSmallCases) {
  auto s = chronological_split(151516);
  EXPECT_EQ(s.train.size(), 106061u);
  EXPECT_EQ(s.val.size(), 22727u);
  EXPECT_EQ(s.test.size(), 22728u);
  s = chronological_split(100);
  EXPECT_EQ(s.train.size(), 70u);
  EXPECT_EQ(s.val.size(), 15u);
  EXPECT_EQ(s.test.size(), 15u);
  s = chronological_split(3);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.val.size(), 0u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_TRUE(s.empty_validation);
  EXPECT_ERROR_CODE(chronological_split(2), ErrorCode::TooFewRows);
  EXPECT_ERROR_CODE(chronological_split(10, {0.5, 0.5, 0.5}), ErrorCode::InvalidConfig);
}

TEST(Split, InvariantsForAllSmallN) {
  for (std::size_t n = 3; n < 2000; ++n) {
    const auto s = chronological_split(n);
    ASSERT_EQ(s.train.begin, 0u);
    ASSERT_EQ(s.train.end, s.val.begin);
    ASSERT_EQ(s.val.end, s.test.begin);
    ASSERT_EQ(s.test.end, n);
    ASSERT_EQ(s.train.size(), static_cast<std::size_t>(std::floor(0.70 * static_cast<double>(n) + 1e-9)));
    ASSERT_EQ(s.val.size(), static_cast<std::size_t>(std::floor(0.15 * static_cast<double>(n) + 1e-9)));
    ASSERT_GE(s.test.size(), 1u);
  }
}

TEST(Lags, SundayExample) {
  // Mon-Fri working, weekends off; 2015-07-05 is a Sunday.
  const Timestamp start = from_civil(2015, 6, 15);
  std::vector<double> cal;
  for (int day = 0; day < 22; ++day) cal.push_back(local_weekday(start + day * kSecondsPerDay, 0) < 5 ? 1 : 0);
  const auto d = grid_days(start, 22, cal);
  const auto t = lag_features(d, 3);
  const Timestamp sunday = from_civil(2015, 7, 5, 16, 0);
  const Timestamp expected[] = {from_civil(2015, 7, 4, 16, 0), from_civil(2015, 6, 28, 16, 0), from_civil(2015, 6, 27, 16, 0)};
  bool found = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (d.rows[t.source_rows[i]].time != sunday) continue;
    found = true;
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t src = t.lag_sources[i * 3 + j];
      EXPECT_EQ(d.rows[src].time, expected[j]);
      EXPECT_EQ(t.features(i, 4 + j), d.rows[src].energy);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Lags, AlternatingCalendarSkipsEveryOtherDay) {
  std::vector<double> cal;
  for (int day = 0; day < 10; ++day) cal.push_back(day % 2 == 0 ? 1 : 0);
  const auto d = grid_days(from_civil(2020, 3, 2), 10, cal);
  const auto t = lag_features(d, 3);
  // days 0..5 lack three earlier same-type days; days 6..9 survive
  EXPECT_EQ(t.size(), 4u * 144u);
  EXPECT_EQ(t.source_rows.front(), 6u * 144u);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::size_t row = t.source_rows[i];
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t.lag_sources[i * 3 + j], row - 2 * 144 * (j + 1));
  }
}

TEST(Lags, FirstDaysDroppedAndNoHistoryError) {
  const auto d = grid_days(from_civil(2020, 3, 2), 5, {1, 1, 1, 1, 1});
  const auto t = lag_features(d, 3);
  EXPECT_EQ(t.source_rows.front(), 3u * 144u);
  EXPECT_EQ(t.size(), 2u * 144u);
  EXPECT_ERROR_CODE(lag_features(grid_days(from_civil(2020, 3, 2), 3, {1, 1, 1}), 3), ErrorCode::InsufficientHistory);
  EXPECT_EQ(t.feature_names.size(), 7u);
  EXPECT_EQ(t.feature_names[4], "energy_lag1");
}

TEST(Lags, EverySourceMatchesCalendarAndClockOracle) {
  std::mt19937_64 rng(9);
  std::vector<double> cal;
  for (int day = 0; day < 30; ++day) cal.push_back(static_cast<double>(rng() % 2));
  const auto d = grid_days(from_civil(2019, 1, 1), 30, cal, 1800);
  const auto t = lag_features(d, 3);
  // brute-force oracle: scan all earlier rows by timestamp
  std::size_t emitted = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<std::size_t> want;
    for (std::size_t j = i; j-- > 0 && want.size() < 3;) {
      if (local_time_of_day(d.rows[j].time, 0) == local_time_of_day(d.rows[i].time, 0) &&
          local_day(d.rows[j].time, 0) < local_day(d.rows[i].time, 0) && d.rows[j].calendar == d.rows[i].calendar) {
        want.push_back(j);
      }
    }
    if (want.size() < 3) continue;
    ASSERT_LT(emitted, t.size());
    ASSERT_EQ(t.source_rows[emitted], i);
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t src = t.lag_sources[emitted * 3 + k];
      EXPECT_EQ(src, want[k]);
      EXPECT_LT(d.rows[src].time, d.rows[i].time);
    }
    ++emitted;
  }
  EXPECT_EQ(emitted, t.size());
}

TEST(Windowize, CountsAndShift) {
  const auto d = grid_days(0, 1, {1});
  const auto small = slice_rows(d, 0, 10);
  const auto s = windowize(small, 6);
  EXPECT_EQ(s.size(), 4u);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) EXPECT_EQ(s.targets[i + 1], s.targets[i] + 1);
  EXPECT_EQ(s.targets[0], small.rows[6].energy);
  const auto seq = s.sequence(1);
  EXPECT_EQ(seq.size(), 30u);
  EXPECT_EQ(seq[0], small.rows[1].energy);
  EXPECT_EQ(seq[5], small.rows[2].energy);
  const auto one = windowize(small, 1);
  EXPECT_EQ(one.size(), 9u);
  EXPECT_EQ(one.sequence(0).size(), 5u);
  EXPECT_EQ(one.targets[0], small.rows[1].energy);
  EXPECT_ERROR_CODE(windowize(small, 10), ErrorCode::WindowTooLong);
  EXPECT_ERROR_CODE(windowize(small, 0), ErrorCode::WindowTooLong);
}

TEST(FeatureScores, PerfectIndependentAndScaled) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<double> y(5000), noise(5000);
  for (auto& v : y) v = n01(rng);
  for (auto& v : noise) v = n01(rng);
  std::vector<double> half(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) half[i] = y[i] + 2.0 * noise[i];
  const auto scores = feature_scores({{"noise", noise}, {"copy", y}, {"half", half}}, y);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0].feature, "copy");
  EXPECT_EQ(scores[0].score, kPerfectScore);
  EXPECT_EQ(scores[1].feature, "half");
  EXPECT_EQ(scores[2].feature, "noise");
  EXPECT_LT(scores[2].score, 10.0);

  std::vector<double> scaled(half.size());
  for (std::size_t i = 0; i < half.size(); ++i) scaled[i] = 100.0 * half[i] + 3.0;
  const auto again = feature_scores({{"noise", noise}, {"copy", y}, {"half", scaled}}, y);
  EXPECT_NEAR(again[1].score, scores[1].score, 1e-9 * scores[1].score);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(again[i].feature, scores[i].feature);
}

TEST(FeatureScores, FStatisticOracle) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const std::vector<double> y = {2, 1, 4, 3, 6, 5};
  const double r = pearson(x, y);
  // hand value: r = 29/35
  EXPECT_NEAR(r, 29.0 / 35.0, 1e-15);
  const auto s = feature_scores({{"x", x}}, y);
  EXPECT_NEAR(s[0].score, r * r * 4 / (1 - r * r), 1e-12);
}

TEST(FeatureScores, Errors) {
  EXPECT_ERROR_CODE(feature_scores({{"x", {1, 2, 3}}}, std::vector<double>{1, 1, 1}), ErrorCode::ZeroVarianceTarget);
  EXPECT_ERROR_CODE(feature_scores({{"x", {1, 2}}}, std::vector<double>{1, 2}), ErrorCode::TooFewRows);
  const auto s = feature_scores({{"flat", {4, 4, 4}}}, std::vector<double>{1, 2, 3});
  EXPECT_EQ(s[0].score, 0.0);
}

TEST(FeatureScores, AffineRankInvarianceProperty) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 50 + rng() % 200;
    std::vector<double> y(n);
    for (auto& v : y) v = n01(rng);
    std::vector<NamedColumn> cols;
    for (int f = 0; f < 4; ++f) {
      std::vector<double> x(n);
      const double w = n01(rng);
      for (std::size_t i = 0; i < n; ++i) x[i] = w * y[i] + n01(rng);
      cols.push_back({"f" + std::to_string(f), x});
    }
    const auto base = feature_scores(cols, y);
    auto moved = cols;
    for (auto& c : moved) {
      const double a = std::exp(n01(rng)), b = 10 * n01(rng);
      for (auto& v : c.values) v = a * v + b;
    }
    const auto after = feature_scores(moved, y);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(base[i].feature, after[i].feature);
  }
}

TEST(Correlations, SignsAndErrors) {
  AlignedDataset d;
  d.grid_interval = 600;
  for (int i = 0; i < 20; ++i) d.rows.push_back({600 * i, static_cast<double>(i * i), -static_cast<double>(i * i), 20, i * 0.5, static_cast<double>(i % 2)});
  EXPECT_ERROR_CODE(correlations(d), ErrorCode::ZeroVariance);
  const auto r = correlations({{"neg", column(d, 1)}}, column(d, 0));
  EXPECT_NEAR(r[0].r, -1.0, 1e-12);
  EXPECT_EQ(correlations_csv(r).substr(0, 10), "feature,r\n");
}

TEST(Correlations, OccupancyLeadsOnAcademicData) {
  const auto d = testutil::synthetic("academic", 21, 4);
  const auto rs = correlations(d);
  ASSERT_EQ(rs.size(), 4u);
  EXPECT_EQ(rs[0].feature, "occupancy");
  for (const auto& c : rs) {
    EXPECT_GE(c.r, -1.0);
    EXPECT_LE(c.r, 1.0);
    if (c.feature != "occupancy") {
      EXPECT_GT(rs[0].r, std::abs(c.r));
    }
  }
}
