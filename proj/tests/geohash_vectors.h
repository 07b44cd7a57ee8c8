#ifndef STODPPA_TESTS_GEOHASH_VECTORS_H_
#define STODPPA_TESTS_GEOHASH_VECTORS_H_

namespace stodppa::testing {

struct GeohashVector {
  double lat, lon;
  int precision;
  const char* code;
};

// Produced with the pygeohash reference implementation.
inline constexpr GeohashVector kGeohashVectors[] = {
    {57.64911, 10.40744, 11, "u4pruydqqvj"},
    {42.6, -5.6, 5, "ezs42"},
    {37.8324, 112.5584, 9, "ww8p1r4t8"},
    {0.0001, 0.0001, 1, "s"},
    {1.3521, 103.8198, 5, "w21zd"},
    {40.7128, -74.006, 8, "dr5regw3"},
    {51.5074, -0.1278, 7, "gcpvj0d"},
    {-33.8688, 151.2093, 6, "r3gx2f"},
    {35.6762, 139.6503, 10, "xn76cydhzv"},
    {-22.9068, -43.1729, 6, "75cm9t"},
    {48.8584, 2.2945, 9, "u09tunquc"},
    {-89.9, -179.9, 4, "0000"},
    {89.9, 179.9, 4, "zzzz"},
    {0.0, 0.0, 12, "s00000000000"},
    {-0.0001, -0.0001, 3, "7zz"},
    {19.4326, -99.1332, 7, "9g3w81t"},
    {55.7558, 37.6173, 8, "ucfv0n01"},
    {-1.2921, 36.8219, 5, "kzf0t"},
    {64.1466, -21.9426, 6, "ge2kut"},
    {-54.8019, -68.303, 7, "4qr2jxx"},
    {1.2834, 103.8607, 12, "w21z73th3ep5"},
    {28.6139, 77.209, 2, "tt"},
};

}  // namespace stodppa::testing

#endif  // STODPPA_TESTS_GEOHASH_VECTORS_H_
