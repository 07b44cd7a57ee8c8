#include "stodppa/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stodppa/errors.h"

namespace stodppa {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void Fail(const std::string& path, int line_no, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
}

std::int64_t ParseInt(const std::string& s, const std::string& path, int line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    Fail(path, line_no, "expected integer, got '" + s + "'");
  }
  return v;
}

double ParseDouble(const std::string& s, const std::string& path, int line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    Fail(path, line_no, "expected number, got '" + s + "'");
  }
  return v;
}

bool ValidId(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::ifstream OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

std::size_t Corpus::num_trips() const {
  std::size_t n = 0;
  for (const auto& trips : trips_by_user) n += trips.size();
  return n;
}

CorpusStats ComputeStats(const Corpus& corpus) {
  CorpusStats stats;
  stats.users = corpus.num_users();
  stats.locations = corpus.num_locations();
  std::set<int> origins, dests;
  for (const auto& trips : corpus.trips_by_user) {
    for (const Trip& t : trips) {
      origins.insert(t.origin);
      dests.insert(t.dest);
    }
    stats.trips += trips.size();
  }
  stats.origins = static_cast<int>(origins.size());
  stats.destinations = static_cast<int>(dests.size());
  return stats;
}

void SortTrips(Corpus& corpus) {
  for (auto& trips : corpus.trips_by_user) {
    std::stable_sort(trips.begin(), trips.end(), [](const Trip& a, const Trip& b) {
      if (a.pickup_ts != b.pickup_ts) return a.pickup_ts < b.pickup_ts;
      return a.dropoff_ts < b.dropoff_ts;
    });
  }
}

std::vector<LocationRecord> LoadLocations(const std::string& locations_path) {
  std::vector<LocationRecord> locations;
  std::unordered_map<std::string, int> seen;
  std::ifstream in = OpenForRead(locations_path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) Fail(locations_path, 1, "missing header");
  ++line_no;
  if (StripCr(line) != "loc_id,lat,lon") {
    Fail(locations_path, line_no, "expected header 'loc_id,lat,lon'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    line = StripCr(line);
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 3) Fail(locations_path, line_no, "expected 3 fields");
    if (!ValidId(f[0])) Fail(locations_path, line_no, "invalid loc_id '" + f[0] + "'");
    LocationRecord rec{f[0], {ParseDouble(f[1], locations_path, line_no),
                              ParseDouble(f[2], locations_path, line_no)}};
    try {
      geo::Validate(rec.point);
    } catch (const ContractError& e) {
      Fail(locations_path, line_no, e.what());
    }
    if (!seen.emplace(rec.id, static_cast<int>(locations.size())).second) {
      Fail(locations_path, line_no, "duplicate loc_id '" + rec.id + "'");
    }
    locations.push_back(std::move(rec));
  }
  return locations;
}

Corpus LoadTrips(const std::string& trips_path, std::vector<LocationRecord> locations) {
  Corpus corpus;
  corpus.locations = std::move(locations);
  std::unordered_map<std::string, int> loc_index;
  for (int l = 0; l < corpus.num_locations(); ++l) loc_index.emplace(corpus.locations[l].id, l);

  std::unordered_map<std::string, int> user_index;
  std::ifstream in = OpenForRead(trips_path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) Fail(trips_path, 1, "missing header");
  ++line_no;
  if (StripCr(line) != "user_id,origin_id,dest_id,pickup_ts,dropoff_ts") {
    Fail(trips_path, line_no,
         "expected header 'user_id,origin_id,dest_id,pickup_ts,dropoff_ts'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    line = StripCr(line);
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 5) Fail(trips_path, line_no, "expected 5 fields");
    if (!ValidId(f[0])) Fail(trips_path, line_no, "invalid user_id '" + f[0] + "'");
    const auto o = loc_index.find(f[1]);
    const auto d = loc_index.find(f[2]);
    if (o == loc_index.end()) Fail(trips_path, line_no, "unknown origin_id '" + f[1] + "'");
    if (d == loc_index.end()) Fail(trips_path, line_no, "unknown dest_id '" + f[2] + "'");
    Trip trip{o->second, d->second, ParseInt(f[3], trips_path, line_no),
              ParseInt(f[4], trips_path, line_no)};
    if (trip.dropoff_ts < trip.pickup_ts) {
      Fail(trips_path, line_no, "dropoff_ts before pickup_ts");
    }
    auto [it, inserted] = user_index.emplace(f[0], corpus.num_users());
    if (inserted) {
      corpus.users.push_back(f[0]);
      corpus.trips_by_user.emplace_back();
    }
    corpus.trips_by_user[it->second].push_back(trip);
  }
  SortTrips(corpus);
  return corpus;
}

Corpus LoadCorpus(const std::string& trips_path, const std::string& locations_path) {
  return LoadTrips(trips_path, LoadLocations(locations_path));
}

void SaveCorpus(const Corpus& corpus, const std::string& trips_path,
                const std::string& locations_path) {
  {
    std::ofstream out(locations_path);
    if (!out) throw IoError("cannot write " + locations_path);
    out << "loc_id,lat,lon\n" << std::setprecision(17);
    for (const auto& loc : corpus.locations) {
      out << loc.id << ',' << loc.point.lat << ',' << loc.point.lon << '\n';
    }
    if (!out) throw IoError("write failed: " + locations_path);
  }
  std::ofstream out(trips_path);
  if (!out) throw IoError("cannot write " + trips_path);
  out << "user_id,origin_id,dest_id,pickup_ts,dropoff_ts\n";
  for (int u = 0; u < corpus.num_users(); ++u) {
    for (const Trip& t : corpus.trips_by_user[u]) {
      out << corpus.users[u] << ',' << corpus.locations[t.origin].id << ','
          << corpus.locations[t.dest].id << ',' << t.pickup_ts << ',' << t.dropoff_ts << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + trips_path);
}

PreprocessResult Preprocess(const Corpus& corpus, int min_trips, int min_users) {
  const int n_loc = corpus.num_locations();
  const int n_user = corpus.num_users();
  std::vector<bool> loc_alive(n_loc, true);
  std::vector<bool> user_alive(n_user, true);

  auto trip_alive = [&](const Trip& t) { return loc_alive[t.origin] && loc_alive[t.dest]; };

  bool changed = true;
  while (changed) {
    changed = false;
    for (int u = 0; u < n_user; ++u) {
      if (!user_alive[u]) continue;
      const auto& trips = corpus.trips_by_user[u];
      const auto n = std::count_if(trips.begin(), trips.end(), trip_alive);
      if (n < min_trips) {
        user_alive[u] = false;
        changed = true;
      }
    }
    std::vector<std::set<int>> visitors(n_loc);
    for (int u = 0; u < n_user; ++u) {
      if (!user_alive[u]) continue;
      for (const Trip& t : corpus.trips_by_user[u]) {
        if (!trip_alive(t)) continue;
        visitors[t.origin].insert(u);
        visitors[t.dest].insert(u);
      }
    }
    for (int l = 0; l < n_loc; ++l) {
      if (loc_alive[l] && static_cast<int>(visitors[l].size()) < min_users) {
        loc_alive[l] = false;
        changed = true;
      }
    }
  }

  PreprocessResult result;
  std::vector<int> loc_remap(n_loc, -1);
  for (int l = 0; l < n_loc; ++l) {
    if (!loc_alive[l]) continue;
    loc_remap[l] = result.corpus.num_locations();
    result.corpus.locations.push_back(corpus.locations[l]);
  }
  for (int u = 0; u < n_user; ++u) {
    if (!user_alive[u]) {
      result.removed_users.push_back(corpus.users[u]);
      continue;
    }
    std::vector<Trip> kept;
    for (const Trip& t : corpus.trips_by_user[u]) {
      if (!trip_alive(t)) continue;
      kept.push_back({loc_remap[t.origin], loc_remap[t.dest], t.pickup_ts, t.dropoff_ts});
    }
    result.corpus.users.push_back(corpus.users[u]);
    result.corpus.trips_by_user.push_back(std::move(kept));
  }
  result.empty_warning = result.corpus.empty();
  return result;
}

SplitResult ChronologicalSplit(const Corpus& corpus, double train_ratio) {
  if (!(train_ratio > 0.0 && train_ratio <= 1.0)) {
    throw ContractError("train_ratio must be in (0, 1]");
  }
  SplitResult split;
  split.train.locations = split.test.locations = corpus.locations;
  split.train.users = split.test.users = corpus.users;
  for (int u = 0; u < corpus.num_users(); ++u) {
    const auto& trips = corpus.trips_by_user[u];
    const auto n = static_cast<double>(trips.size());
    // The epsilon keeps exact products such as 0.7 * 10 from rounding up.
    auto n_train = static_cast<std::size_t>(std::ceil(train_ratio * n - 1e-9));
    n_train = std::min(n_train, trips.size());
    split.train.trips_by_user.emplace_back(trips.begin(), trips.begin() + n_train);
    split.test.trips_by_user.emplace_back(trips.begin() + n_train, trips.end());
    if (split.test.trips_by_user.back().empty()) split.flagged_users.push_back(u);
  }
  return split;
}

EncoderSequences BuildEncoderSequences(std::span<const Trip> trips, std::int64_t utc_offset_s) {
  EncoderSequences seq;
  if (trips.size() < 2) return seq;
  for (std::size_t j = 1; j < trips.size(); ++j) {
    seq.origins.push_back({trips[j].origin, geo::TimeslotOf(trips[j].pickup_ts, utc_offset_s)});
    seq.dests.push_back(
        {trips[j - 1].dest, geo::TimeslotOf(trips[j - 1].dropoff_ts, utc_offset_s)});
  }
  return seq;
}

std::vector<TrainingExample> BuildTrainingExamples(int user, std::span<const Trip> trips) {
  std::vector<TrainingExample> out;
  for (std::size_t j = 1; j < trips.size(); ++j) {
    out.push_back({user, trips[j].origin, trips[j - 1].dest, trips[j].dest});
  }
  return out;
}

std::vector<TrainingExample> BuildTestQueries(int user, std::span<const Trip> train,
                                              std::span<const Trip> test) {
  std::vector<TrainingExample> out;
  for (std::size_t j = 0; j < test.size(); ++j) {
    int prev;
    if (j > 0) {
      prev = test[j - 1].dest;
    } else if (!train.empty()) {
      prev = train.back().dest;
    } else {
      continue;
    }
    out.push_back({user, test[j].origin, prev, test[j].dest});
  }
  return out;
}

Vocab BuildVocab(const Corpus& corpus, int geohash_precision, std::int64_t utc_offset_s) {
  Vocab vocab;
  vocab.n_locations = corpus.num_locations();
  vocab.n_users = corpus.num_users();
  vocab.geohash_precision = geohash_precision;
  vocab.utc_offset_s = utc_offset_s;
  std::unordered_map<std::string, int> cell_index;
  for (const auto& loc : corpus.locations) {
    const std::string code = geo::GeohashEncode(loc.point, geohash_precision);
    auto [it, inserted] = cell_index.emplace(code, static_cast<int>(vocab.geohash_codes.size()));
    if (inserted) vocab.geohash_codes.push_back(code);
    vocab.loc_geohash.push_back(it->second);
  }
  vocab.n_geohashes = static_cast<int>(vocab.geohash_codes.size());
  return vocab;
}

IntervalTables BuildIntervalTables(const Corpus& train) {
  const int n = train.num_locations();
  IntervalTables tables;
  tables.n = n;
  const auto nn = static_cast<std::size_t>(n) * n;
  tables.spatial.assign(nn, 0.0);
  tables.temporal.assign(nn, 0.0);

  double d_max = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = geo::HaversineKm(train.locations[i].point, train.locations[j].point);
      tables.spatial[static_cast<std::size_t>(i) * n + j] = d;
      tables.spatial[static_cast<std::size_t>(j) * n + i] = d;
      d_max = std::max(d_max, d);
    }
  }
  if (d_max <= 0.0) d_max = 1.0;
  for (double& v : tables.spatial) v /= d_max;
  tables.spatial_scale_km = d_max;

  std::vector<double> sum(nn, 0.0);
  std::vector<int> count(nn, 0);
  for (const auto& trips : train.trips_by_user) {
    for (const Trip& t : trips) {
      const double hours = static_cast<double>(t.dropoff_ts - t.pickup_ts) / 3600.0;
      const auto a = static_cast<std::size_t>(t.origin) * n + t.dest;
      const auto b = static_cast<std::size_t>(t.dest) * n + t.origin;
      sum[a] += hours;
      ++count[a];
      if (b != a) {
        sum[b] += hours;
        ++count[b];
      }
    }
  }
  double t_max = 0.0;
  for (std::size_t k = 0; k < nn; ++k) {
    if (count[k] > 0) {
      tables.temporal[k] = sum[k] / count[k];
      t_max = std::max(t_max, tables.temporal[k]);
    }
  }
  if (t_max <= 0.0) t_max = 1.0;
  for (double& v : tables.temporal) v /= t_max;
  tables.temporal_scale_h = t_max;
  return tables;
}

}  // namespace stodppa
