#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "geohash_vectors.h"
#include "stodppa/errors.h"
#include "stodppa/geo.h"

namespace stodppa::geo {
namespace {

TEST_CASE("geohash matches reference vectors") {
  for (const testing::GeohashVector& v : testing::kGeohashVectors) {
    CAPTURE(v.code);
    CHECK(GeohashEncode({v.lat, v.lon}, v.precision) == v.code);
  }
}

TEST_CASE("geohash prefix family") {
  const std::string full = "u4pruydqqvj";
  for (int p = 1; p <= 11; ++p) {
    CHECK(GeohashEncode({57.64911, 10.40744}, p) == full.substr(0, p));
  }
}

TEST_CASE("geohash prefix property and cell containment") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 1000; ++i) {
    GeoPoint p{lat(rng), lon(rng)};
    std::string g12 = GeohashEncode(p, 12);
    for (int k = 1; k < 12; ++k) REQUIRE(GeohashEncode(p, k) == g12.substr(0, k));
    GeohashBox box = GeohashDecode(GeohashEncode(p, 6));
    CHECK(box.lat_min <= p.lat);
    CHECK(p.lat <= box.lat_max);
    CHECK(box.lon_min <= p.lon);
    CHECK(p.lon <= box.lon_max);
  }
}

TEST_CASE("geohash contract") {
  CHECK_THROWS_AS(GeohashEncode({0, 0}, 0), ContractError);
  CHECK_THROWS_AS(GeohashEncode({0, 0}, 13), ContractError);
  CHECK_THROWS_AS(GeohashEncode({91, 0}, 5), ContractError);
  CHECK_THROWS_AS(GeohashEncode({0, NAN}, 5), ContractError);
  CHECK_THROWS_AS(GeohashDecode("ab"), ContractError);  // 'a' is not base-32
}

double CosineLawKm(GeoPoint a, GeoPoint b) {
  const double r = M_PI / 180.0;
  double c = std::sin(a.lat * r) * std::sin(b.lat * r) +
             std::cos(a.lat * r) * std::cos(b.lat * r) * std::cos((b.lon - a.lon) * r);
  return kEarthRadiusKm * std::acos(std::clamp(c, -1.0, 1.0));
}

TEST_CASE("haversine") {
  CHECK(HaversineKm({0, 0}, {0, 90}) == doctest::Approx(10007.543398).epsilon(1e-9));
  CHECK(HaversineKm({0, 0}, {0, 180}) == doctest::Approx(M_PI * kEarthRadiusKm));
  CHECK(HaversineKm({1.3, 103.8}, {1.3, 103.8}) == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(-89, 89), lon(-180, 180);
  for (int i = 0; i < 500; ++i) {
    GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
    double ab = HaversineKm(a, b);
    CHECK(ab == doctest::Approx(CosineLawKm(a, b)).epsilon(1e-6));
    CHECK(ab == HaversineKm(b, a));
    CHECK(HaversineKm(a, c) <= ab + HaversineKm(b, c) + 1e-9);
  }
  CHECK_THROWS_AS(HaversineKm({-91, 0}, {0, 0}), ContractError);
}

TEST_CASE("timeslots") {
  CHECK(TimeslotOf(0) == 0);
  CHECK(TimeslotOf(10799) == 0);
  CHECK(TimeslotOf(10800) == 1);
  CHECK(TimeslotOf(86399) == 7);
  CHECK(TimeslotOf(86400) == 0);
  CHECK(TimeslotOf(-1) == 7);
  CHECK(TimeslotOf(0, 8 * 3600) == 2);
  for (std::int64_t t = 0; t < 86400 * 3; t += 977) {
    int s = TimeslotOf(t);
    CHECK(s == (t % 86400) / 10800);
  }
}

}  // namespace
}  // namespace stodppa::geo
