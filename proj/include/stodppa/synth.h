#ifndef STODPPA_SYNTH_H_
#define STODPPA_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "stodppa/dataset.h"

namespace stodppa::synth {

struct SynthConfig {
  int n_users = 200;
  int n_locations = 60;
  int n_clusters = 6;
  int trips_per_user = 30;
  int n_types = 16;
  double p_noise = 0.1;
  // Probability that the next origin lies in the cluster the transition
  // table assigns to the previous destination's cluster; otherwise the
  // origin cluster is uniform.
  double p_transition = 0.5;
  // Extra users with few trips (cold-start cohort), sharing the rule.
  int n_cold_users = 0;
  int cold_min_trips = 3;
  int cold_max_trips = 9;
  std::uint64_t seed = 7;
  double lat_min = 1.20, lat_max = 1.48;
  double lon_min = 103.60, lon_max = 104.05;
  int geohash_precision = 5;

  void Validate() const;
};

// The latent structure behind a generated corpus.
struct PlantedRule {
  int n_types = 0;
  int n_clusters = 0;
  int n_locations = 0;
  double p_noise = 0.0;
  std::vector<int> loc_cluster;               // location -> cluster
  std::vector<std::string> cluster_geohash;   // cluster -> geohash cell
  std::vector<int> transition;                // cluster -> preferred next origin cluster
  // schedule[type][cluster]: pickup timeslot when departing from `cluster`.
  std::vector<std::vector<int>> schedule;
  // target[type][cluster][slot]: planted destination.
  std::vector<std::vector<std::vector<int>>> target;
  std::vector<std::string> user_ids;  // main cohort then cold-start cohort
  std::vector<int> user_type;         // parallel to user_ids

  int Destination(int type, int origin_loc, int slot) const {
    return target[type][loc_cluster[origin_loc]][slot];
  }
  int TypeOf(const std::string& user_id) const;
};

struct SynthOutput {
  Corpus corpus;
  PlantedRule rule;
};

// Fully determined by the config. Throws ContractError when the bounding box
// cannot hold n_clusters mutually non-adjacent geohash cells.
SynthOutput Generate(const SynthConfig& config);

// Best achievable Acc@1 when the rule is known: 1 - p (1 - 1/L).
double OracleAccuracy(const SynthConfig& config);

// Acc@1 of predicting the planted destination for every trip but the first
// of each user.
double BayesRuleAccuracy(const SynthOutput& output);

// Structured-text manifest of the rule (JSON).
std::string RuleManifest(const SynthConfig& config, const PlantedRule& rule);

}  // namespace stodppa::synth

#endif  // STODPPA_SYNTH_H_
