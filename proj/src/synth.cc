#include "stodppa/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "json.hpp"
#include "stodppa/errors.h"
#include "stodppa/geo.h"

namespace stodppa::synth {
namespace {

using Rng = std::mt19937_64;

int UniformInt(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::string Id(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%04d", prefix, i);
  return buf;
}

// Geohash cells fully inside the box, every other row and column so no two
// chosen cells touch.
std::vector<geo::GeohashBox> CandidateCells(const SynthConfig& c) {
  const geo::GeohashBox origin =
      geo::GeohashDecode(geo::GeohashEncode({c.lat_min, c.lon_min}, c.geohash_precision));
  const double dlat = origin.lat_max - origin.lat_min;
  const double dlon = origin.lon_max - origin.lon_min;
  std::vector<geo::GeohashBox> cells;
  for (int i = 1;; i += 2) {
    const double lat0 = origin.lat_min + i * dlat;
    if (lat0 + dlat > c.lat_max) break;
    for (int j = 1;; j += 2) {
      const double lon0 = origin.lon_min + j * dlon;
      if (lon0 + dlon > c.lon_max) break;
      cells.push_back({lat0, lat0 + dlat, lon0, lon0 + dlon});
    }
  }
  return cells;
}

}  // namespace

void SynthConfig::Validate() const {
  if (n_clusters < 2 || n_locations < n_clusters) {
    throw ContractError("need n_locations >= n_clusters >= 2");
  }
  if (n_users < 0 || n_cold_users < 0) throw ContractError("user counts must be non-negative");
  if (n_users > 0 && trips_per_user < 10) {
    throw ContractError("main cohort needs trips_per_user >= 10");
  }
  if (n_types < 1) throw ContractError("need at least one user type");
  if (!(p_noise >= 0.0 && p_noise < 1.0)) throw ContractError("p_noise must be in [0, 1)");
  if (!(p_transition >= 0.0 && p_transition <= 1.0)) {
    throw ContractError("p_transition must be in [0, 1]");
  }
  if (cold_min_trips < 1 || cold_max_trips < cold_min_trips) {
    throw ContractError("invalid cold-start trip range");
  }
  if (!(lat_min < lat_max && lon_min < lon_max)) throw ContractError("empty bounding box");
  if (geohash_precision < 1 || geohash_precision > 12) {
    throw ContractError("geohash precision must be in [1, 12]");
  }
}

int PlantedRule::TypeOf(const std::string& user_id) const {
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    if (user_ids[i] == user_id) return user_type[i];
  }
  throw ContractError("unknown synthetic user " + user_id);
}

SynthOutput Generate(const SynthConfig& config) {
  config.Validate();
  Rng rng(config.seed);
  SynthOutput out;
  PlantedRule& rule = out.rule;
  Corpus& corpus = out.corpus;
  rule.n_types = config.n_types;
  rule.n_clusters = config.n_clusters;
  rule.n_locations = config.n_locations;
  rule.p_noise = config.p_noise;

  std::vector<geo::GeohashBox> cells = CandidateCells(config);
  if (static_cast<int>(cells.size()) < config.n_clusters) {
    throw ContractError("bounding box too small to separate " +
                        std::to_string(config.n_clusters) + " clusters at geohash precision " +
                        std::to_string(config.geohash_precision));
  }
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(config.n_clusters);

  // Locations go round-robin to clusters, placed in the middle 60% of the
  // cluster's cell.
  for (int l = 0; l < config.n_locations; ++l) {
    const int k = l % config.n_clusters;
    const geo::GeohashBox& cell = cells[k];
    const double lat_pad = 0.2 * (cell.lat_max - cell.lat_min);
    const double lon_pad = 0.2 * (cell.lon_max - cell.lon_min);
    const geo::GeoPoint p{Uniform(rng, cell.lat_min + lat_pad, cell.lat_max - lat_pad),
                          Uniform(rng, cell.lon_min + lon_pad, cell.lon_max - lon_pad)};
    corpus.locations.push_back({Id('L', l), p});
    rule.loc_cluster.push_back(k);
  }
  for (const auto& cell : cells) {
    rule.cluster_geohash.push_back(geo::GeohashEncode(
        {(cell.lat_min + cell.lat_max) / 2.0, (cell.lon_min + cell.lon_max) / 2.0},
        config.geohash_precision));
  }
  std::vector<std::vector<int>> cluster_locs(config.n_clusters);
  for (int l = 0; l < config.n_locations; ++l) cluster_locs[rule.loc_cluster[l]].push_back(l);

  for (int k = 0; k < config.n_clusters; ++k) {
    rule.transition.push_back(UniformInt(rng, 0, config.n_clusters - 1));
  }
  rule.schedule.assign(config.n_types, std::vector<int>(config.n_clusters));
  rule.target.assign(config.n_types, std::vector<std::vector<int>>(
                                         config.n_clusters, std::vector<int>(geo::kNumTimeslots)));
  std::vector<int> all_locs(config.n_locations);
  for (int l = 0; l < config.n_locations; ++l) all_locs[l] = l;
  for (int t = 0; t < config.n_types; ++t) {
    // Distinct destinations per origin cluster within a type while possible.
    std::shuffle(all_locs.begin(), all_locs.end(), rng);
    for (int k = 0; k < config.n_clusters; ++k) {
      rule.schedule[t][k] = UniformInt(rng, 0, geo::kNumTimeslots - 1);
      for (int s = 0; s < geo::kNumTimeslots; ++s) {
        rule.target[t][k][s] = all_locs[(k * geo::kNumTimeslots + s) % config.n_locations];
      }
    }
  }

  const double span_km = geo::HaversineKm({config.lat_min, config.lon_min},
                                          {config.lat_max, config.lon_max});
  auto make_user = [&](const std::string& id, int n_trips) {
    const int type = UniformInt(rng, 0, config.n_types - 1);
    rule.user_ids.push_back(id);
    rule.user_type.push_back(type);
    corpus.users.push_back(id);
    std::vector<Trip> trips;
    std::int64_t day = 19000 + UniformInt(rng, 0, 30);  // days since epoch
    int prev_dest = -1;
    for (int j = 0; j < n_trips; ++j) {
      int cluster;
      if (prev_dest >= 0 && Uniform(rng, 0.0, 1.0) < config.p_transition) {
        cluster = rule.transition[rule.loc_cluster[prev_dest]];
      } else {
        cluster = UniformInt(rng, 0, config.n_clusters - 1);
      }
      const auto& candidates = cluster_locs[cluster];
      const int origin = candidates[UniformInt(rng, 0, static_cast<int>(candidates.size()) - 1)];
      const int slot = rule.schedule[type][cluster];
      int dest = rule.target[type][cluster][slot];
      if (Uniform(rng, 0.0, 1.0) < config.p_noise) dest = UniformInt(rng, 0, config.n_locations - 1);

      const double km =
          geo::HaversineKm(corpus.locations[origin].point, corpus.locations[dest].point);
      double minutes = 5.0 + 55.0 * km / span_km + Uniform(rng, -3.0, 3.0);
      minutes = std::clamp(minutes, 5.0, 60.0);
      // Pickups stay early enough in the slot that the slot is exact.
      const std::int64_t slot_start = day * 86400 + static_cast<std::int64_t>(slot) * 3 * 3600;
      const std::int64_t pickup = slot_start + UniformInt(rng, 0, 3 * 3600 - 1);
      const std::int64_t dropoff = pickup + static_cast<std::int64_t>(std::lround(minutes * 60.0));
      trips.push_back({origin, dest, pickup, dropoff});
      prev_dest = dest;
      day += 1 + UniformInt(rng, 0, 1);
    }
    corpus.trips_by_user.push_back(std::move(trips));
  };

  for (int u = 0; u < config.n_users; ++u) make_user(Id('U', u), config.trips_per_user);
  for (int u = 0; u < config.n_cold_users; ++u) {
    make_user(Id('C', u), UniformInt(rng, config.cold_min_trips, config.cold_max_trips));
  }
  return out;
}

double OracleAccuracy(const SynthConfig& config) {
  return 1.0 - config.p_noise * (1.0 - 1.0 / config.n_locations);
}

double BayesRuleAccuracy(const SynthOutput& output) {
  long hits = 0, total = 0;
  const PlantedRule& rule = output.rule;
  for (int u = 0; u < output.corpus.num_users(); ++u) {
    const int type = rule.TypeOf(output.corpus.users[u]);
    const auto& trips = output.corpus.trips_by_user[u];
    for (std::size_t j = 1; j < trips.size(); ++j) {
      const int slot = geo::TimeslotOf(trips[j].pickup_ts);
      hits += rule.Destination(type, trips[j].origin, slot) == trips[j].dest;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

std::string RuleManifest(const SynthConfig& config, const PlantedRule& rule) {
  nlohmann::json j;
  j["config"] = {{"n_users", config.n_users},
                 {"n_locations", config.n_locations},
                 {"n_clusters", config.n_clusters},
                 {"trips_per_user", config.trips_per_user},
                 {"n_types", config.n_types},
                 {"p_noise", config.p_noise},
                 {"p_transition", config.p_transition},
                 {"n_cold_users", config.n_cold_users},
                 {"seed", config.seed}};
  j["oracle_accuracy"] = OracleAccuracy(config);
  j["loc_cluster"] = rule.loc_cluster;
  j["cluster_geohash"] = rule.cluster_geohash;
  j["transition"] = rule.transition;
  j["schedule"] = rule.schedule;
  j["target"] = rule.target;
  nlohmann::json users = nlohmann::json::object();
  for (std::size_t i = 0; i < rule.user_ids.size(); ++i) users[rule.user_ids[i]] = rule.user_type[i];
  j["user_type"] = users;
  return j.dump(2) + "\n";
}

}  // namespace stodppa::synth
