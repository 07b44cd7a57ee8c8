#include "stodppa/run_config.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "stodppa/errors.h"

namespace stodppa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void RejectUnknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ContractError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ContractError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ContractError(where + "." + key + ": " + e.what());
  }
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string Resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).string();
}

}  // namespace

void RunConfig::ValidatePaths() const {
  for (const std::string& p : {trips_path, locations_path}) {
    if (p.empty()) throw ContractError("data.trips and data.locations are required");
    if (!fs::is_regular_file(p)) throw IoError("no such file: " + p);
  }
}

nlohmann::json ModelConfigToJson(const ModelConfig& c) {
  return json{{"dim", c.dim},
              {"hidden", c.hidden},
              {"lr", c.lr},
              {"epochs", c.epochs},
              {"geohash_precision", c.geohash_precision},
              {"n_timeslots", c.n_timeslots},
              {"leaky_slope", c.leaky_slope},
              {"seed", c.seed},
              {"attention_context", AttentionContextName(c.attention_context)},
              {"variant", VariantName(c.variant)}};
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j, ModelConfig c) {
  const std::string where = "model";
  RejectUnknown(j, {"dim", "hidden", "lr", "epochs", "geohash_precision", "n_timeslots",
                    "leaky_slope", "seed", "attention_context", "variant"},
                where);
  Read(j, "dim", c.dim, where);
  Read(j, "hidden", c.hidden, where);
  Read(j, "lr", c.lr, where);
  Read(j, "epochs", c.epochs, where);
  Read(j, "geohash_precision", c.geohash_precision, where);
  Read(j, "n_timeslots", c.n_timeslots, where);
  Read(j, "leaky_slope", c.leaky_slope, where);
  Read(j, "seed", c.seed, where);
  std::string s;
  if (j.contains("attention_context")) {
    Read(j, "attention_context", s, where);
    c.attention_context = ParseAttentionContext(s);
  }
  if (j.contains("variant")) {
    Read(j, "variant", s, where);
    c.variant = ParseVariant(s);
  }
  c.Validate();
  return c;
}

RunConfig ParseRunConfig(const nlohmann::json& j, const std::string& base_dir) {
  RejectUnknown(j, {"data", "model", "seed"}, "config");
  RunConfig rc;
  rc.model = ModelConfig::DeskScale();
  if (j.contains("data")) {
    const json& d = j.at("data");
    RejectUnknown(d, {"trips", "locations", "min_trips", "min_users", "train_ratio",
                      "utc_offset_s"},
                  "data");
    Read(d, "trips", rc.trips_path, "data");
    Read(d, "locations", rc.locations_path, "data");
    Read(d, "min_trips", rc.prepare.min_trips, "data");
    Read(d, "min_users", rc.prepare.min_users, "data");
    Read(d, "train_ratio", rc.prepare.train_ratio, "data");
    Read(d, "utc_offset_s", rc.prepare.utc_offset_s, "data");
    rc.trips_path = Resolve(base_dir, rc.trips_path);
    rc.locations_path = Resolve(base_dir, rc.locations_path);
  }
  if (j.contains("model")) rc.model = ModelConfigFromJson(j.at("model"), rc.model);
  if (j.contains("seed")) Read(j, "seed", rc.model.seed, "config");
  rc.prepare.geohash_precision = rc.model.geohash_precision;
  if (!(rc.prepare.train_ratio > 0.0 && rc.prepare.train_ratio <= 1.0)) {
    throw ContractError("data.train_ratio must be in (0, 1]");
  }
  return rc;
}

RunConfig LoadRunConfig(const std::string& path) {
  return ParseRunConfig(ReadJsonFile(path), fs::path(path).parent_path().string());
}

nlohmann::json ToJson(const RunConfig& rc) {
  return json{{"data",
               {{"trips", rc.trips_path},
                {"locations", rc.locations_path},
                {"min_trips", rc.prepare.min_trips},
                {"min_users", rc.prepare.min_users},
                {"train_ratio", rc.prepare.train_ratio},
                {"utc_offset_s", rc.prepare.utc_offset_s}}},
              {"model", ModelConfigToJson(rc.model)},
              {"seed", rc.model.seed}};
}

synth::SynthConfig ParseSynthConfig(const nlohmann::json& j) {
  const std::string where = "synth config";
  RejectUnknown(j, {"n_users", "n_locations", "n_clusters", "trips_per_user", "n_types",
                    "p_noise", "p_transition", "n_cold_users", "cold_min_trips",
                    "cold_max_trips", "seed", "lat_min", "lat_max", "lon_min", "lon_max",
                    "geohash_precision"},
                where);
  synth::SynthConfig c;
  Read(j, "n_users", c.n_users, where);
  Read(j, "n_locations", c.n_locations, where);
  Read(j, "n_clusters", c.n_clusters, where);
  Read(j, "trips_per_user", c.trips_per_user, where);
  Read(j, "n_types", c.n_types, where);
  Read(j, "p_noise", c.p_noise, where);
  Read(j, "p_transition", c.p_transition, where);
  Read(j, "n_cold_users", c.n_cold_users, where);
  Read(j, "cold_min_trips", c.cold_min_trips, where);
  Read(j, "cold_max_trips", c.cold_max_trips, where);
  Read(j, "seed", c.seed, where);
  Read(j, "lat_min", c.lat_min, where);
  Read(j, "lat_max", c.lat_max, where);
  Read(j, "lon_min", c.lon_min, where);
  Read(j, "lon_max", c.lon_max, where);
  Read(j, "geohash_precision", c.geohash_precision, where);
  c.Validate();
  return c;
}

synth::SynthConfig LoadSynthConfig(const std::string& path) {
  return ParseSynthConfig(ReadJsonFile(path));
}

std::string ConfigHash(const nlohmann::json& j) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace stodppa
