#include "stodppa/geo.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stodppa/errors.h"

namespace stodppa::geo {
namespace {

constexpr char kBase32[] = "0123456789bcdefghjkmnpqrstuvwxyz";

double ToRadians(double deg) { return deg * std::numbers::pi / 180.0; }

int Base32Index(char c) {
  for (int i = 0; i < 32; ++i) {
    if (kBase32[i] == c) return i;
  }
  throw ContractError(std::string("invalid geohash character '") + c + "'");
}

}  // namespace

void Validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
    throw ContractError("non-finite coordinate");
  }
  if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
    throw ContractError("coordinate out of range");
  }
}

double HaversineKm(const GeoPoint& a, const GeoPoint& b) {
  Validate(a);
  Validate(b);
  const double dlat = ToRadians(b.lat - a.lat);
  const double dlon = ToRadians(b.lon - a.lon);
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  double h = s_lat * s_lat +
             std::cos(ToRadians(a.lat)) * std::cos(ToRadians(b.lat)) * s_lon * s_lon;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

std::string GeohashEncode(const GeoPoint& p, int precision) {
  Validate(p);
  if (precision < 1 || precision > 12) {
    throw ContractError("geohash precision must be in [1, 12]");
  }
  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
  std::string code;
  code.reserve(precision);
  bool even_bit = true;  // even bits refine longitude
  int bit = 0;
  int ch = 0;
  while (static_cast<int>(code.size()) < precision) {
    if (even_bit) {
      const double mid = (lon_lo + lon_hi) / 2.0;
      if (p.lon >= mid) {
        ch = (ch << 1) | 1;
        lon_lo = mid;
      } else {
        ch <<= 1;
        lon_hi = mid;
      }
    } else {
      const double mid = (lat_lo + lat_hi) / 2.0;
      if (p.lat >= mid) {
        ch = (ch << 1) | 1;
        lat_lo = mid;
      } else {
        ch <<= 1;
        lat_hi = mid;
      }
    }
    even_bit = !even_bit;
    if (++bit == 5) {
      code.push_back(kBase32[ch]);
      bit = 0;
      ch = 0;
    }
  }
  return code;
}

GeohashBox GeohashDecode(const std::string& code) {
  if (code.empty() || code.size() > 12) {
    throw ContractError("geohash length must be in [1, 12]");
  }
  GeohashBox box{-90.0, 90.0, -180.0, 180.0};
  bool even_bit = true;
  for (char c : code) {
    const int value = Base32Index(c);
    for (int shift = 4; shift >= 0; --shift) {
      const bool set = (value >> shift) & 1;
      if (even_bit) {
        const double mid = (box.lon_min + box.lon_max) / 2.0;
        (set ? box.lon_min : box.lon_max) = mid;
      } else {
        const double mid = (box.lat_min + box.lat_max) / 2.0;
        (set ? box.lat_min : box.lat_max) = mid;
      }
      even_bit = !even_bit;
    }
  }
  return box;
}

int TimeslotOf(std::int64_t epoch_seconds, std::int64_t utc_offset_s) {
  constexpr std::int64_t kDay = 86400;
  std::int64_t sec_of_day = (epoch_seconds + utc_offset_s) % kDay;
  if (sec_of_day < 0) sec_of_day += kDay;
  return static_cast<int>(sec_of_day / (3600 * kHoursPerTimeslot));
}

}  // namespace stodppa::geo
