#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bldgcast/error.hpp"
#include "bldgcast/ingest.hpp"
#include "bldgcast/rng.hpp"
#include "bldgcast/timeutil.hpp"

namespace bldgcast {

enum class BuildingKind { Academic, Hostel, Dining, Facilities };

/// Synthetic building description. Loads are per minute; the fused 10-minute
/// energy is the sum of ten of them. The occupancy and activity shapes per
/// kind are invented but follow the qualitative pattern of real campus data:
/// academic buildings fill up on working days, hostels empty out during
/// working hours, dining peaks at meals, and facilities are run by a small
/// constant crew.
struct BuildingProfile {
  BuildingKind kind = BuildingKind::Academic;
  double base_load = 8.0;             // Wh per minute on working days
  double offday_base_factor = 0.8;    // base multiplier on non-working days
  double occupancy_coupling = 0.6;    // Wh per minute per person
  double temperature_coupling = 1.5;  // Wh per minute per degC above threshold
  double temperature_threshold = 26.0;
  double peak_occupancy = 300.0;
  double offday_occupancy = 0.15;     // fraction of the peak present on non-working days
  double noise = 0.05;                // multiplicative Gaussian noise on energy, in [0, 0.5]
  double holiday_rate = 0.05;         // chance a weekday is non-working
  double mean_temperature = 26.0;
  double seasonal_amplitude = 7.0;
  double diurnal_amplitude = 5.0;
  double mean_humidity = 55.0;
  /// Academic-calendar breaks as (first day of year, length in days); every
  /// day inside one is non-working.
  std::vector<std::pair<int, int>> vacations = {{130, 60}, {355, 14}};
};

inline void check_profile(const BuildingProfile& p) {
  const bool ok = p.base_load >= 0 && p.offday_base_factor >= 0 && p.occupancy_coupling >= 0 &&
                  p.temperature_coupling >= 0 && p.peak_occupancy >= 0 && p.offday_occupancy >= 0 &&
                  p.noise >= 0 && p.noise <= 0.5 && p.holiday_rate >= 0 && p.holiday_rate <= 1 &&
                  std::isfinite(p.mean_temperature) && std::isfinite(p.mean_humidity) &&
                  std::all_of(p.vacations.begin(), p.vacations.end(),
                              [](const auto& v) { return v.first >= 1 && v.first <= 366 && v.second >= 0; });
  if (!ok) fail(ErrorCode::InvalidProfile, "loads and couplings must be non-negative and noise within [0, 0.5]");
}

/// Named presets mirroring the kinds of buildings on a residential campus.
inline std::optional<BuildingProfile> profile_preset(std::string_view name) {
  BuildingProfile p;
  if (name == "academic") return p;
  if (name == "library") {
    p.base_load = 6.0;
    p.peak_occupancy = 200.0;
    p.occupancy_coupling = 0.5;
    p.offday_occupancy = 0.3;
    return p;
  }
  if (name == "lecture") {
    p.base_load = 4.0;
    p.peak_occupancy = 400.0;
    p.occupancy_coupling = 0.4;
    p.offday_occupancy = 0.05;
    return p;
  }
  if (name == "hostel" || name == "boys_hostel" || name == "girls_hostel") {
    p.kind = BuildingKind::Hostel;
    p.base_load = name == "girls_hostel" ? 12.0 : 15.0;
    p.offday_base_factor = 1.1;
    p.peak_occupancy = name == "girls_hostel" ? 300.0 : 400.0;
    p.occupancy_coupling = 0.4;
    p.temperature_coupling = 1.0;
    p.temperature_threshold = 27.0;
    return p;
  }
  if (name == "dining") {
    p.kind = BuildingKind::Dining;
    p.base_load = 10.0;
    p.offday_base_factor = 0.95;
    p.peak_occupancy = 250.0;
    p.occupancy_coupling = 0.8;
    p.temperature_coupling = 1.2;
    return p;
  }
  if (name == "facilities") {
    p.kind = BuildingKind::Facilities;
    p.base_load = 60.0;
    p.offday_base_factor = 1.0;
    p.peak_occupancy = 5.0;
    p.occupancy_coupling = 0.0;
    p.temperature_coupling = 8.0;
    p.temperature_threshold = 20.0;
    return p;
  }
  return std::nullopt;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"library",      "academic",   "lecture", "boys_hostel",
                                                 "girls_hostel", "facilities", "dining"};
  return names;
}

namespace detail {

/// 1-based day of year of a local day number.
inline int day_of_year(std::int64_t day) {
  using namespace std::chrono;
  const sys_days d{std::chrono::days{day}};
  const year_month_day ymd{d};
  return static_cast<int>((d - sys_days{ymd.year() / January / 1}).count()) + 1;
}

inline bool in_vacation(const BuildingProfile& p, int doy) {
  for (const auto& [first, length] : p.vacations) {
    const int offset = (doy - first + 366) % 366;
    if (offset < length) return true;
  }
  return false;
}

inline double bump(double hour, double center, double width) {
  const double d = (hour - center) / width;
  return std::exp(-0.5 * d * d);
}

/// Expected occupancy (before jitter) at `hour` of a working / non-working day.
inline double occupancy_shape(const BuildingProfile& p, double hour, bool working) {
  switch (p.kind) {
    case BuildingKind::Academic: {
      const double day = 0.55 * bump(hour, 10.5, 1.6) + 0.45 * bump(hour, 15.0, 1.8);
      return working ? p.peak_occupancy * day + 3.0 : p.peak_occupancy * p.offday_occupancy * bump(hour, 13.0, 3.0) + 2.0;
    }
    case BuildingKind::Hostel: {
      const double away = bump(hour, 13.0, 3.0);
      return p.peak_occupancy * (working ? 0.9 - 0.65 * away : 0.85 - 0.2 * away);
    }
    case BuildingKind::Dining: {
      const double meals = 0.35 * bump(hour, 8.0, 0.8) + bump(hour, 13.0, 1.0) + 0.9 * bump(hour, 20.0, 1.0);
      return p.peak_occupancy * (working ? 1.0 : 0.8) * meals + 2.0;
    }
    case BuildingKind::Facilities: return p.peak_occupancy - 0.5;
  }
  return 0.0;
}

}  // namespace detail

/// The five raw channels of one synthetic building.
struct SyntheticBuilding {
  std::map<Channel, RawSeries> channels;
};

/// Generates `days` whole local days starting at `start` (local midnight):
/// energy every minute, occupancy every 10 minutes, temperature and humidity
/// every 30 minutes, calendar once per day. With zero noise the 10-minute
/// energy is an exact function of the fused exogenous channels.
inline SyntheticBuilding synth_building(const BuildingProfile& profile, std::size_t days, std::uint64_t seed,
                                        Timestamp start = from_civil(2014, 2, 15), std::int64_t utc_offset = 0) {
  check_profile(profile);
  if (days == 0) fail(ErrorCode::InvalidProfile, "days must be at least 1");
  const Timestamp t0 = start - utc_offset;
  const auto span = static_cast<Timestamp>(days) * kSecondsPerDay;

  std::normal_distribution<double> normal(0.0, 1.0);

  // calendar: Monday-Friday working unless drawn as a holiday
  std::mt19937_64 cal_rng(derive_seed(seed, 10));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<bool> working(days);
  RawSeries calendar{Channel::Calendar, std::string(default_unit(Channel::Calendar)), kSecondsPerDay, {}};
  for (std::size_t d = 0; d < days; ++d) {
    const Timestamp t = t0 + static_cast<Timestamp>(d) * kSecondsPerDay;
    const bool weekday = local_weekday(t, utc_offset) < 5;
    const bool holiday = unit(cal_rng) < profile.holiday_rate;
    working[d] = weekday && !holiday && !detail::in_vacation(profile, detail::day_of_year(local_day(t, utc_offset)));
    calendar.points.push_back({t, working[d] ? 1.0 : 0.0});
  }

  // temperature and humidity at 30 minutes, one extra sample closing the span
  std::mt19937_64 wx_rng(derive_seed(seed, 11));
  RawSeries temperature{Channel::Temperature, std::string(default_unit(Channel::Temperature)), 1800, {}};
  RawSeries humidity{Channel::Humidity, std::string(default_unit(Channel::Humidity)), 1800, {}};
  double weather = 0.0;
  for (Timestamp t = t0; t <= t0 + span; t += 1800) {
    if ((t - t0) % kSecondsPerDay == 0) weather = 0.6 * weather + 1.2 * normal(wx_rng);
    const double doy = static_cast<double>(detail::day_of_year(local_day(t, utc_offset)));
    const double hour = static_cast<double>(local_time_of_day(t, utc_offset)) / 3600.0;
    const double seasonal = profile.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * (doy - 60.0) / 365.0);
    const double diurnal = profile.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0);
    const double temp = profile.mean_temperature + seasonal + diurnal + weather + 0.3 * normal(wx_rng);
    const double hum = std::clamp(
        profile.mean_humidity - 2.0 * (temp - profile.mean_temperature) + 4.0 * normal(wx_rng), 5.0, 100.0);
    temperature.points.push_back({t, temp});
    humidity.points.push_back({t, hum});
  }

  // occupancy at 10 minutes
  std::mt19937_64 occ_rng(derive_seed(seed, 12));
  std::bernoulli_distribution crew(0.5);
  RawSeries occupancy{Channel::Occupancy, std::string(default_unit(Channel::Occupancy)), 600, {}};
  for (Timestamp t = t0; t < t0 + span; t += 600) {
    const auto day = static_cast<std::size_t>((t - t0) / kSecondsPerDay);
    const double hour = static_cast<double>(local_time_of_day(t, utc_offset)) / 3600.0;
    double occ = 0.0;
    if (profile.kind == BuildingKind::Facilities) {
      occ = std::max(0.0, profile.peak_occupancy - (crew(occ_rng) ? 1.0 : 0.0));
    } else {
      occ = std::max(0.0, std::round(detail::occupancy_shape(profile, hour, working[day]) * (1.0 + 0.05 * normal(occ_rng))));
    }
    occupancy.points.push_back({t, occ});
  }

  // energy at 1 minute, driven by the 10-minute occupancy and the temperature
  // interpolated at the start of each 10-minute window
  std::mt19937_64 e_rng(derive_seed(seed, 13));
  RawSeries energy{Channel::Energy, std::string(default_unit(Channel::Energy)), 60, {}};
  energy.points.reserve(days * 1440);
  for (std::size_t w = 0; w < occupancy.points.size(); ++w) {
    const Timestamp tw = occupancy.points[w].time;
    const auto day = static_cast<std::size_t>((tw - t0) / kSecondsPerDay);
    const std::size_t k = static_cast<std::size_t>((tw - t0) / 1800);
    const auto& a = temperature.points[k];
    const auto& b = temperature.points[k + 1];
    const double frac = static_cast<double>(tw - a.time) / static_cast<double>(b.time - a.time);
    const double temp = *a.value + (*b.value - *a.value) * frac;
    const double per_minute = profile.base_load * (working[day] ? 1.0 : profile.offday_base_factor) +
                              profile.occupancy_coupling * *occupancy.points[w].value +
                              profile.temperature_coupling * std::max(0.0, temp - profile.temperature_threshold);
    for (int m = 0; m < 10; ++m) {
      double e = per_minute;
      if (profile.noise > 0.0) e = std::max(0.0, e * (1.0 + profile.noise * normal(e_rng)));
      energy.points.push_back({tw + m * 60, e});
    }
  }

  SyntheticBuilding out;
  out.channels.emplace(Channel::Energy, std::move(energy));
  out.channels.emplace(Channel::Occupancy, std::move(occupancy));
  out.channels.emplace(Channel::Temperature, std::move(temperature));
  out.channels.emplace(Channel::Humidity, std::move(humidity));
  out.channels.emplace(Channel::Calendar, std::move(calendar));
  return out;
}

/// Noise-free 10-minute energy implied by one fused row of a synthetic building.
inline double expected_window_energy(const BuildingProfile& p, double occupancy, double temperature, double calendar) {
  const double per_minute = p.base_load * (calendar == 1.0 ? 1.0 : p.offday_base_factor) +
                            p.occupancy_coupling * occupancy +
                            p.temperature_coupling * std::max(0.0, temperature - p.temperature_threshold);
  return 10.0 * per_minute;
}

}  // namespace bldgcast
