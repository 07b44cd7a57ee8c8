#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <string>

#include "oracles.h"
#include "stodppa/dataset.h"
#include "stodppa/errors.h"
#include "test_util.h"

namespace stodppa {
namespace {

using testing::TempDir;
using testing::WriteFile;

constexpr char kLocations[] =
    "loc_id,lat,lon\n"
    "A,1.30,103.80\n"
    "B,1.35,103.85\n"
    "C,1.40,103.90\r\n";

TEST_CASE("load corpus sorts trips and keeps first-appearance order") {
  TempDir dir;
  WriteFile(dir.file("loc.csv"), kLocations);
  WriteFile(dir.file("trips.csv"),
            "user_id,origin_id,dest_id,pickup_ts,dropoff_ts\n"
            "u2,A,B,100,200\n"
            "u1,B,C,300,400\n"
            "u1,A,B,50,60\n"
            "\n"
            "u1,C,A,50,55\n");
  Corpus c = LoadCorpus(dir.file("trips.csv"), dir.file("loc.csv"));
  REQUIRE(c.num_locations() == 3);
  REQUIRE(c.users == std::vector<std::string>{"u2", "u1"});
  REQUIRE(c.trips_by_user[1].size() == 3);
  CHECK(c.trips_by_user[1][0] == Trip{2, 0, 50, 55});
  CHECK(c.trips_by_user[1][1] == Trip{0, 1, 50, 60});
  CHECK(c.trips_by_user[1][2] == Trip{1, 2, 300, 400});

  CorpusStats s = ComputeStats(c);
  CHECK(s.users == 2);
  CHECK(s.locations == 3);
  CHECK(s.origins == 3);
  CHECK(s.destinations == 3);
  CHECK(s.trips == 4);

  SaveCorpus(c, dir.file("t2.csv"), dir.file("l2.csv"));
  Corpus again = LoadCorpus(dir.file("t2.csv"), dir.file("l2.csv"));
  CHECK(again.users == c.users);
  CHECK(again.trips_by_user == c.trips_by_user);
  CHECK(again.locations[2].point == c.locations[2].point);
}

TEST_CASE("load corpus errors carry file and line") {
  TempDir dir;
  WriteFile(dir.file("loc.csv"), kLocations);
  auto fails_with = [&](const std::string& trips, const std::string& needle) {
    WriteFile(dir.file("t.csv"), trips);
    try {
      LoadCorpus(dir.file("t.csv"), dir.file("loc.csv"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  const std::string header = "user_id,origin_id,dest_id,pickup_ts,dropoff_ts\n";
  fails_with(header + "u,A,Z,1,2\n", "t.csv:2: unknown dest_id 'Z'");
  fails_with(header + "u,A,B,1,2\nu,A,B,5,4\n", "t.csv:3: dropoff_ts before pickup_ts");
  fails_with(header + "u,A,B,x,2\n", "t.csv:2:");
  fails_with(header + "u,A,B,1\n", "t.csv:2: expected 5 fields");
  fails_with("user,origin,dest,pickup,dropoff\n", "t.csv:1: expected header");
  fails_with(header + "u u,A,B,1,2\n", "invalid user_id");

  WriteFile(dir.file("bad_loc.csv"), "loc_id,lat,lon\nA,95,0\n");
  CHECK_THROWS_AS(LoadCorpus(dir.file("t.csv"), dir.file("bad_loc.csv")), ParseError);
  CHECK_THROWS_AS(LoadCorpus(dir.file("missing.csv"), dir.file("loc.csv")), IoError);
}

TEST_CASE("preprocess matches brute-force filter and is a fixpoint") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 40; ++round) {
    Corpus c = oracle::RandomCorpus(rng, 40, 25, 30);
    PreprocessResult r = Preprocess(c, 10, 10);
    CHECK(oracle::Flatten(r.corpus) == oracle::BruteForceFilter(oracle::Flatten(c), 10, 10));
    for (const auto& trips : r.corpus.trips_by_user) CHECK(trips.size() >= 10);
    PreprocessResult again = Preprocess(r.corpus, 10, 10);
    CHECK(again.removed_users.empty());
    CHECK(oracle::Flatten(again.corpus) == oracle::Flatten(r.corpus));
    CHECK(r.removed_users.size() + r.corpus.users.size() == c.users.size());
  }
}

TEST_CASE("preprocess of empty or fully filtered input") {
  PreprocessResult r = Preprocess(Corpus{}, 10, 10);
  CHECK(r.empty_warning);
  CHECK(ComputeStats(r.corpus).trips == 0);

  Corpus c;
  c.locations = {{"A", {1, 1}}, {"B", {1, 2}}};
  c.users = {"u"};
  c.trips_by_user = {{{0, 1, 1, 2}}};
  r = Preprocess(c, 10, 10);
  CHECK(r.empty_warning);
  CHECK(r.removed_users == std::vector<std::string>{"u"});
}

TEST_CASE("chronological split") {
  Corpus c;
  c.locations = {{"A", {1, 1}}, {"B", {1, 2}}};
  c.users = {"u", "v", "w"};
  auto make = [](int n) {
    std::vector<Trip> t;
    for (int i = 0; i < n; ++i) t.push_back({i % 2, (i + 1) % 2, i * 10, i * 10 + 5});
    return t;
  };
  c.trips_by_user = {make(10), make(11), make(1)};
  SplitResult s = ChronologicalSplit(c, 0.7);
  CHECK(s.train.trips_by_user[0].size() == 7);
  CHECK(s.test.trips_by_user[0].size() == 3);
  CHECK(s.train.trips_by_user[1].size() == 8);  // ceil(7.7)
  CHECK(s.train.trips_by_user[2].size() == 1);
  CHECK(s.flagged_users == std::vector<int>{2});
  CHECK(s.test.trips_by_user[0].front() == c.trips_by_user[0][7]);
  CHECK_THROWS_AS(ChronologicalSplit(c, 0.0), ContractError);
}

TEST_CASE("encoder sequences, training examples and test queries") {
  std::vector<Trip> trips = {{0, 1, 0, 100}, {2, 3, 11000, 11100}, {4, 5, 30000, 86000}};
  EncoderSequences seq = BuildEncoderSequences(trips);
  CHECK(seq.origins == std::vector<Visit>{{2, 1}, {4, 2}});
  CHECK(seq.dests == std::vector<Visit>{{1, 0}, {3, 1}});
  CHECK(BuildEncoderSequences(std::span(trips).first(1)).origins.empty());

  auto ex = BuildTrainingExamples(7, trips);
  CHECK(ex == std::vector<TrainingExample>{{7, 2, 1, 3}, {7, 4, 3, 5}});

  std::vector<Trip> test = {{6, 7, 0, 1}, {8, 9, 2, 3}};
  auto q = BuildTestQueries(7, trips, test);
  CHECK(q == std::vector<TrainingExample>{{7, 6, 5, 7}, {7, 8, 7, 9}});
  CHECK(BuildTestQueries(7, {}, test).size() == 1);
}

TEST_CASE("vocab and interval tables") {
  Corpus c;
  c.locations = {{"A", {1.30, 103.80}}, {"B", {1.30001, 103.80001}}, {"C", {1.40, 103.90}}};
  c.users = {"u"};
  c.trips_by_user = {{{0, 2, 0, 3600}, {2, 0, 0, 7200}, {1, 2, 0, 1800}}};
  Vocab v = BuildVocab(c, 5);
  CHECK(v.n_locations == 3);
  CHECK(v.n_geohashes == 2);
  CHECK(v.loc_geohash == std::vector<int>{0, 0, 1});
  CHECK(v.geohash_codes[0] == geo::GeohashEncode(c.locations[0].point, 5));

  IntervalTables t = BuildIntervalTables(c);
  const double d02 = geo::HaversineKm(c.locations[0].point, c.locations[2].point);
  const double d12 = geo::HaversineKm(c.locations[1].point, c.locations[2].point);
  CHECK(t.spatial_scale_km == doctest::Approx(std::max(d02, d12)));
  for (int i = 0; i < 3; ++i) {
    CHECK(t.SpatialRow(i)[i] == 0.0);
    for (int j = 0; j < 3; ++j) {
      CHECK(t.SpatialRow(i)[j] == t.SpatialRow(j)[i]);
      CHECK(t.SpatialRow(i)[j] <= 1.0);
    }
  }
  // 0<->2: mean of 1h and 2h; 1<->2: 0.5h; largest mean is 1.5h.
  CHECK(t.temporal_scale_h == doctest::Approx(1.5));
  CHECK(t.TemporalRow(0)[2] == doctest::Approx(1.0));
  CHECK(t.TemporalRow(2)[1] == doctest::Approx(0.5 / 1.5));
  CHECK(t.TemporalRow(0)[1] == 0.0);
}

}  // namespace
}  // namespace stodppa
