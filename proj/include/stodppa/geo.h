#ifndef STODPPA_GEO_H_
#define STODPPA_GEO_H_

#include <cstdint>
#include <string>

namespace stodppa::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr int kNumTimeslots = 8;
inline constexpr int kHoursPerTimeslot = 24 / kNumTimeslots;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Throws ContractError for non-finite or out-of-range coordinates.
void Validate(const GeoPoint& p);

// Great-circle distance on a sphere of radius kEarthRadiusKm.
double HaversineKm(const GeoPoint& a, const GeoPoint& b);

// Standard base-32 geohash of `precision` characters, precision in [1, 12].
std::string GeohashEncode(const GeoPoint& p, int precision);

struct GeohashBox {
  double lat_min, lat_max, lon_min, lon_max;
};

// Bounding box of a geohash cell. Used by tests and the synthetic generator.
GeohashBox GeohashDecode(const std::string& code);

// Three-hour slot of the day, [0, 8). `utc_offset_s` shifts the day boundary.
int TimeslotOf(std::int64_t epoch_seconds, std::int64_t utc_offset_s = 0);

}  // namespace stodppa::geo

#endif  // STODPPA_GEO_H_
