#include <cmath>

#include "test_util.hpp"

using namespace bldgcast;

TEST(Datagen, RatesAndUnits) {
  const auto b = synth_building(*profile_preset("academic"), 3, 1);
  ASSERT_EQ(b.channels.size(), 5u);
  EXPECT_EQ(b.channels.at(Channel::Energy).points.size(), 3u * 1440);
  EXPECT_EQ(b.channels.at(Channel::Occupancy).points.size(), 3u * 144);
  EXPECT_EQ(b.channels.at(Channel::Temperature).points.size(), 3u * 48 + 1);
  EXPECT_EQ(b.channels.at(Channel::Calendar).points.size(), 3u);
  for (const auto& [c, s] : b.channels) {
    const auto v = validate_series(s);
    EXPECT_EQ(v.interval(), s.interval_native);
  }
  EXPECT_EQ(validate_series(b.channels.at(Channel::Energy)).interval(), 60);
  EXPECT_EQ(validate_series(b.channels.at(Channel::Humidity)).interval(), 1800);
}

TEST(Datagen, SameSeedBitIdentical) {
  const auto p = *profile_preset("hostel");
  const auto a = synth_building(p, 4, 7);
  const auto b = synth_building(p, 4, 7);
  for (Channel c : kAllChannels) EXPECT_EQ(serialize_series(a.channels.at(c)), serialize_series(b.channels.at(c)));
  const auto other = synth_building(p, 4, 8);
  EXPECT_NE(a.channels.at(Channel::Energy), other.channels.at(Channel::Energy));
}

TEST(Datagen, DegenerateProfileIsConstant) {
  BuildingProfile p;
  p.noise = 0;
  p.occupancy_coupling = 0;
  p.temperature_coupling = 0;
  p.offday_base_factor = 1.0;
  const auto b = synth_building(p, 2, 3);
  for (const auto& pt : b.channels.at(Channel::Energy).points) EXPECT_EQ(*pt.value, p.base_load);
}

TEST(Datagen, NoiseFreeEnergyIsExactFunctionOfInputs) {
  for (const std::string name : {"academic", "hostel", "dining", "facilities"}) {
    auto p = *profile_preset(name);
    p.noise = 0;
    const auto d = fuse_channels(synth_building(p, 6, 5).channels);
    ASSERT_FALSE(d.rows.empty());
    for (const auto& r : d.rows) {
      const double expect = expected_window_energy(p, r.occupancy, r.temperature, r.calendar);
      ASSERT_NEAR(r.energy, expect, 1e-9 * (1 + expect)) << name << " " << format_timestamp(r.time);
    }
  }
}

TEST(Datagen, InvalidProfiles) {
  BuildingProfile p;
  p.noise = 0.6;
  EXPECT_ERROR_CODE(synth_building(p, 2, 1), ErrorCode::InvalidProfile);
  p = BuildingProfile{};
  p.occupancy_coupling = -1;
  EXPECT_ERROR_CODE(synth_building(p, 2, 1), ErrorCode::InvalidProfile);
  EXPECT_ERROR_CODE(synth_building(BuildingProfile{}, 0, 1), ErrorCode::InvalidProfile);
  EXPECT_FALSE(profile_preset("warehouse"));
  for (const auto& n : preset_names()) EXPECT_TRUE(profile_preset(n)) << n;
}

TEST(Datagen, AcademicOccupancyDominates) {
  const auto d = testutil::synthetic("academic", 28, 9);
  const auto rs = correlations(d);
  EXPECT_EQ(rs[0].feature, "occupancy");
  const auto scores = feature_scores(d);
  EXPECT_EQ(scores[0].feature, "occupancy");
}

TEST(Datagen, FacilitiesTemperatureDominates) {
  const auto d = testutil::synthetic("facilities", 28, 9);
  double r_t = 0, r_oc = 0;
  for (const auto& c : correlations(d)) {
    if (c.feature == "temperature") r_t = c.r;
    if (c.feature == "occupancy") r_oc = c.r;
  }
  EXPECT_GT(r_t, r_oc);
  EXPECT_EQ(feature_scores(d)[0].feature, "temperature");
}

TEST(Datagen, HostelInvertsWorkingDayPattern) {
  const auto d = testutil::synthetic("hostel", 21, 2);
  double work = 0, off = 0;
  int nw = 0, no = 0;
  for (const auto& r : d.rows) {
    const auto tod = local_time_of_day(r.time, 0);
    if (tod < 10 * 3600 || tod >= 16 * 3600) continue;
    if (r.calendar == 1) {
      work += r.occupancy;
      ++nw;
    } else {
      off += r.occupancy;
      ++no;
    }
  }
  ASSERT_GT(nw, 0);
  ASSERT_GT(no, 0);
  EXPECT_LT(work / nw, off / no);
}
