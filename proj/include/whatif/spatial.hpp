// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "whatif/error.hpp"
#include "whatif/time.hpp"
#include "whatif/timeseries.hpp"

namespace whatif {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kDefaultApproachToleranceDeg = 45.0;

enum class CargoStatus { Ballast, Laden };

constexpr std::string_view to_string(CargoStatus s) noexcept { return s == CargoStatus::Ballast ? "ballast" : "laden"; }

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct VesselRecord {
  std::uint32_t imo = 0;
  Timestamp timestamp{};
  double lat = 0.0;
  double lon = 0.0;
  double heading = 0.0;
  double speed_knots = 0.0;
  CargoStatus cargo_status = CargoStatus::Ballast;

  GeoPoint position() const noexcept { return {lat, lon}; }
  friend bool operator==(const VesselRecord&, const VesselRecord&) = default;
};

struct PortRegion {
  std::string name;
  GeoPoint center;
  double radius_km = 100.0;
};

struct BBox {
  double lat_min = -90.0;
  double lon_min = -180.0;
  double lat_max = 90.0;
  double lon_max = 180.0;
};

/// Seven digits; the weighted sum (7,6,5,4,3,2) of the first six digits,
/// mod 10, equals the last digit.
inline bool imo_valid(std::uint32_t imo) noexcept {
  if (imo < 1000000 || imo > 9999999) return false;
  std::uint32_t body = imo / 10;
  std::uint32_t sum = 0;
  for (std::uint32_t weight = 2; weight <= 7; ++weight) {
    sum += (body % 10) * weight;
    body /= 10;
  }
  return sum % 10 == imo % 10;
}

/// Appends the check digit to a six-digit body (100000..999999).
inline std::uint32_t imo_from_body(std::uint32_t body) {
  if (body < 100000 || body > 999999) throw Error(Errc::InvalidRecord, "IMO body must have six digits");
  std::uint32_t sum = 0, rest = body;
  for (std::uint32_t weight = 2; weight <= 7; ++weight) {
    sum += (rest % 10) * weight;
    rest /= 10;
  }
  return body * 10 + sum % 10;
}

inline void check_coordinate(GeoPoint p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon > -180.0 && p.lon <= 180.0))
    throw Error(Errc::InvalidCoordinate, "coordinate (" + format_number(p.lat) + ", " + format_number(p.lon) +
                                             ") out of bounds");
}

inline void validate_record(const VesselRecord& v) {
  if (!imo_valid(v.imo)) throw Error(Errc::InvalidRecord, "IMO " + std::to_string(v.imo) + " fails check digit");
  check_coordinate(v.position());
  if (!(v.heading >= 0.0 && v.heading < 360.0))
    throw Error(Errc::InvalidRecord, "heading " + format_number(v.heading) + " outside [0, 360)");
  if (!(v.speed_knots >= 0.0)) throw Error(Errc::InvalidRecord, "negative speed");
}

namespace detail {
inline double radians(double deg) { return deg * std::numbers::pi / 180.0; }
inline double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double normalize_deg(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  return d >= 360.0 ? 0.0 : d;
}
}  // namespace detail

/// Great-circle distance on a sphere of radius 6371 km.
inline double haversine_km(GeoPoint a, GeoPoint b) {
  check_coordinate(a);
  check_coordinate(b);
  const double dlat = detail::radians(b.lat - a.lat);
  const double dlon = detail::radians(b.lon - a.lon);
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(detail::radians(a.lat)) * std::cos(detail::radians(b.lat)) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

/// Initial great-circle bearing from a to b; 0 = north, 90 = east.
inline double bearing_deg(GeoPoint a, GeoPoint b) {
  check_coordinate(a);
  check_coordinate(b);
  if (a == b) throw Error(Errc::UndefinedBearing, "bearing between identical points");
  const double p1 = detail::radians(a.lat), p2 = detail::radians(b.lat);
  const double dl = detail::radians(b.lon - a.lon);
  const double y = std::sin(dl) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  return detail::normalize_deg(detail::degrees(std::atan2(y, x)));
}

/// Point reached from `start` after `distance_km` along initial bearing.
inline GeoPoint destination(GeoPoint start, double bearing, double distance_km) {
  const double d = distance_km / kEarthRadiusKm;
  const double th = detail::radians(bearing);
  const double p1 = detail::radians(start.lat), l1 = detail::radians(start.lon);
  const double p2 = std::asin(std::sin(p1) * std::cos(d) + std::cos(p1) * std::sin(d) * std::cos(th));
  const double l2 = l1 + std::atan2(std::sin(th) * std::sin(d) * std::cos(p1), std::cos(d) - std::sin(p1) * std::sin(p2));
  double lon = detail::degrees(l2);
  lon = std::fmod(lon + 180.0, 360.0);
  if (lon <= 0.0) lon += 360.0;
  return {detail::degrees(p2), lon - 180.0};
}

/// Smallest angle between two headings, in [0, 180].
inline double circular_distance_deg(double a, double b) {
  const double d = std::abs(detail::normalize_deg(a) - detail::normalize_deg(b));
  return std::min(d, 360.0 - d);
}

/// True when the vessel's heading points within `tolerance_deg` of the
/// bearing to the port center. Vessels inside the port radius are reported
/// as AlreadyInPort.
inline bool is_approaching(const VesselRecord& v, const PortRegion& port,
                           double tolerance_deg = kDefaultApproachToleranceDeg) {
  if (!(tolerance_deg > 0.0 && tolerance_deg <= 180.0))
    throw Error(Errc::InvalidSpec, "approach tolerance must be in (0, 180]");
  if (haversine_km(v.position(), port.center) <= port.radius_km)
    throw Error(Errc::AlreadyInPort, "vessel " + std::to_string(v.imo) + " is inside " + port.name);
  return circular_distance_deg(v.heading, bearing_deg(v.position(), port.center)) <= tolerance_deg;
}

inline std::string supply_variable(const PortRegion& port) { return "ballast_approaching_" + port.name; }

/// Weekly count of distinct ballast vessels approaching the port. Within a
/// week the latest record of each IMO decides. Weeks start on Monday and
/// the index covers every week from the first to the last record.
inline TimeSeriesFrame aggregate_supply(const std::vector<VesselRecord>& records, const PortRegion& port,
                                        double tolerance_deg = kDefaultApproachToleranceDeg) {
  std::map<std::pair<Date, std::uint32_t>, const VesselRecord*> latest;
  for (const auto& r : records) {
    const auto week = week_start(std::chrono::floor<std::chrono::days>(r.timestamp));
    auto& slot = latest[{week, r.imo}];
    if (!slot || slot->timestamp <= r.timestamp) slot = &r;
  }
  std::map<Date, double> counts;
  for (const auto& [key, rec] : latest) {
    auto& c = counts[key.first];
    if (rec->cargo_status != CargoStatus::Ballast) continue;
    try {
      if (is_approaching(*rec, port, tolerance_deg)) c += 1.0;
    } catch (const Error& e) {
      if (e.code() != Errc::AlreadyInPort) throw;
    }
  }
  std::vector<Date> index;
  std::vector<TimeSeriesFrame::Row> values;
  if (!counts.empty()) {
    for (Date d = counts.begin()->first; d <= counts.rbegin()->first; d += std::chrono::days{7}) {
      index.push_back(d);
      const auto it = counts.find(d);
      values.push_back({it == counts.end() ? 0.0 : it->second});
    }
  }
  return TimeSeriesFrame(std::move(index), {supply_variable(port)}, std::move(values));
}

/// Latest record per IMO at or before `at`, restricted to the box (inclusive),
/// ordered by IMO.
inline std::vector<VesselRecord> vessels_in_view(const std::vector<VesselRecord>& records, const BBox& box,
                                                 Timestamp at) {
  if (box.lat_min > box.lat_max || box.lon_min > box.lon_max)
    throw Error(Errc::InvalidBBox, "bounding box is inverted");
  if (box.lat_min < -90.0 || box.lat_max > 90.0 || box.lon_min < -180.0 || box.lon_max > 180.0)
    throw Error(Errc::InvalidBBox, "bounding box outside coordinate bounds");
  std::map<std::uint32_t, const VesselRecord*> latest;
  for (const auto& r : records) {
    if (r.timestamp > at) continue;
    auto& slot = latest[r.imo];
    if (!slot || slot->timestamp <= r.timestamp) slot = &r;
  }
  std::vector<VesselRecord> out;
  for (const auto& [imo, r] : latest)
    if (r->lat >= box.lat_min && r->lat <= box.lat_max && r->lon >= box.lon_min && r->lon <= box.lon_max)
      out.push_back(*r);
  return out;
}

inline constexpr std::string_view kVesselCsvHeader = "imo,timestamp,lat,lon,heading,speed_knots,cargo_status";

inline std::vector<VesselRecord> load_vessels(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<VesselRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (!have_header) {
      if (detail::trim(line) != kVesselCsvHeader)
        throw Error(Errc::ParseError, "row 1: header must be '" + std::string(kVesselCsvHeader) + "'", line_no);
      have_header = true;
      continue;
    }
    const auto f = detail::split(line);
    const std::string where = "row " + std::to_string(line_no) + ": ";
    if (f.size() != 7) throw Error(Errc::ParseError, where + "expected 7 fields", line_no);
    VesselRecord r;
    const auto imo = parse_number(f[0]);
    if (!imo || *imo != std::floor(*imo) || *imo < 0 || *imo > 9999999)
      throw Error(Errc::ParseError, where + "bad IMO '" + std::string(f[0]) + "'", line_no);
    r.imo = static_cast<std::uint32_t>(*imo);
    const auto ts = parse_timestamp(f[1]);
    if (!ts) throw Error(Errc::ParseError, where + "bad timestamp '" + std::string(f[1]) + "'", line_no);
    r.timestamp = *ts;
    double* numeric[] = {&r.lat, &r.lon, &r.heading, &r.speed_knots};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto v = parse_number(f[i + 2]);
      if (!v) throw Error(Errc::ParseError, where + "bad number '" + std::string(f[i + 2]) + "'", line_no);
      *numeric[i] = *v;
    }
    if (f[6] == "ballast")
      r.cargo_status = CargoStatus::Ballast;
    else if (f[6] == "laden")
      r.cargo_status = CargoStatus::Laden;
    else
      throw Error(Errc::ParseError, where + "cargo_status must be 'ballast' or 'laden'", line_no);
    try {
      validate_record(r);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.message(), line_no);
    }
    out.push_back(r);
  }
  if (!have_header) throw Error(Errc::ParseError, "missing header", 1);
  return out;
}

inline std::vector<VesselRecord> load_vessels(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  return load_vessels(in);
}

inline std::string serialize_vessels(const std::vector<VesselRecord>& records) {
  std::string out(kVesselCsvHeader);
  out += "\n";
  for (const auto& r : records) {
    out += std::to_string(r.imo) + "," + format_timestamp(r.timestamp) + "," + format_number(r.lat) + "," +
           format_number(r.lon) + "," + format_number(r.heading) + "," + format_number(r.speed_knots) + "," +
           std::string(to_string(r.cargo_status)) + "\n";
  }
  return out;
}

inline void to_json(nlohmann::json& j, const VesselRecord& r) {
  j = {{"imo", r.imo},         {"timestamp", format_timestamp(r.timestamp)},
       {"lat", r.lat},         {"lon", r.lon},
       {"heading", r.heading}, {"speed_knots", r.speed_knots},
       {"cargo_status", std::string(to_string(r.cargo_status))}};
}

}  // namespace whatif
