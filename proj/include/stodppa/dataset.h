#ifndef STODPPA_DATASET_H_
#define STODPPA_DATASET_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stodppa/geo.h"

namespace stodppa {

struct LocationRecord {
  std::string id;
  geo::GeoPoint point;
};

// One taxi trip. Locations are indices into Corpus::locations.
struct Trip {
  int origin = 0;
  int dest = 0;
  std::int64_t pickup_ts = 0;
  std::int64_t dropoff_ts = 0;

  friend bool operator==(const Trip&, const Trip&) = default;
};

// All trips grouped per user. trips_by_user[u] is time ordered.
struct Corpus {
  std::vector<LocationRecord> locations;
  std::vector<std::string> users;
  std::vector<std::vector<Trip>> trips_by_user;

  int num_locations() const { return static_cast<int>(locations.size()); }
  int num_users() const { return static_cast<int>(users.size()); }
  std::size_t num_trips() const;
  bool empty() const { return users.empty(); }
};

struct CorpusStats {
  int users = 0;
  int locations = 0;
  int origins = 0;
  int destinations = 0;
  std::size_t trips = 0;
};

CorpusStats ComputeStats(const Corpus& corpus);

// Reads the trips/locations CSV pair. Every user's trips are sorted by
// pickup, then dropoff, then file order. Throws ParseError with line context.
Corpus LoadCorpus(const std::string& trips_path, const std::string& locations_path);
std::vector<LocationRecord> LoadLocations(const std::string& locations_path);
// Trips resolved against an existing location table.
Corpus LoadTrips(const std::string& trips_path, std::vector<LocationRecord> locations);
void SaveCorpus(const Corpus& corpus, const std::string& trips_path,
                const std::string& locations_path);

// Sorts each user's trips chronologically (stable).
void SortTrips(Corpus& corpus);

struct PreprocessResult {
  Corpus corpus;
  // Ids of users present in the input but not in the output.
  std::vector<std::string> removed_users;
  // Set when filtering removed everything.
  bool empty_warning = false;
};

// Alternates the user trip-count filter and the location distinct-user
// filter until neither removes anything. Indices are re-compacted with the
// original relative order preserved.
PreprocessResult Preprocess(const Corpus& corpus, int min_trips = 10, int min_users = 10);

struct SplitResult {
  Corpus train;  // shares locations/users with `test`
  Corpus test;
  std::vector<int> flagged_users;  // users with an empty test partition
};

// First ceil(ratio * n) trips of every user go to train, the rest to test.
SplitResult ChronologicalSplit(const Corpus& corpus, double train_ratio = 0.7);

// A location visit as fed to an encoder.
struct Visit {
  int loc = 0;
  int slot = 0;

  friend bool operator==(const Visit&, const Visit&) = default;
};

struct EncoderSequences {
  std::vector<Visit> origins;  // o_2 .. o_n, slot from pickup time
  std::vector<Visit> dests;    // d_1 .. d_{n-1}, slot from dropoff time
};

// Empty sequences when fewer than two trips are given.
EncoderSequences BuildEncoderSequences(std::span<const Trip> trips,
                                       std::int64_t utc_offset_s = 0);

struct TrainingExample {
  int user = 0;
  int origin = 0;
  int prev_dest = 0;
  int target = 0;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

// (o_j, d_{j-1}) -> d_j for j = 2..n.
std::vector<TrainingExample> BuildTrainingExamples(int user, std::span<const Trip> trips);

// Test queries with a rolling previous destination: the first test trip uses
// the last train destination, later ones the true preceding test destination.
std::vector<TrainingExample> BuildTestQueries(int user, std::span<const Trip> train,
                                              std::span<const Trip> test);

struct Vocab {
  int n_locations = 0;
  int n_users = 0;
  int n_geohashes = 0;
  int n_timeslots = geo::kNumTimeslots;
  int geohash_precision = 5;
  std::int64_t utc_offset_s = 0;
  std::vector<int> loc_geohash;           // location -> geohash index
  std::vector<std::string> geohash_codes;  // geohash index -> code

  int Slot(std::int64_t ts) const { return geo::TimeslotOf(ts, utc_offset_s); }
};

// Geohash indices are assigned in location order of first occurrence.
Vocab BuildVocab(const Corpus& corpus, int geohash_precision = 5,
                 std::int64_t utc_offset_s = 0);

// Global-view interval vectors, max-scaled into [0, 1].
struct IntervalTables {
  int n = 0;
  std::vector<double> spatial;   // n*n, row-major
  std::vector<double> temporal;  // n*n, row-major
  double spatial_scale_km = 1.0;
  double temporal_scale_h = 1.0;

  std::span<const double> SpatialRow(int loc) const {
    return {spatial.data() + static_cast<std::size_t>(loc) * n, static_cast<std::size_t>(n)};
  }
  std::span<const double> TemporalRow(int loc) const {
    return {temporal.data() + static_cast<std::size_t>(loc) * n, static_cast<std::size_t>(n)};
  }
};

// spatial[i][j] = haversine(i, j) / max pairwise distance; temporal[i][j] is
// the mean duration (hours) of train trips between i and j in either
// direction divided by the largest such mean, 0 for pairs never travelled.
IntervalTables BuildIntervalTables(const Corpus& train);

}  // namespace stodppa

#endif  // STODPPA_DATASET_H_
