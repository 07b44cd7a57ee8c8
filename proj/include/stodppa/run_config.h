#ifndef STODPPA_RUN_CONFIG_H_
#define STODPPA_RUN_CONFIG_H_

#include <cstdint>
#include <string>

#include "json.hpp"
#include "stodppa/eval.h"
#include "stodppa/model.h"
#include "stodppa/synth.h"

namespace stodppa {

// Run configuration file (JSON):
//
//   {
//     "data":  {"trips": "trips.csv", "locations": "locations.csv",
//               "min_trips": 10, "min_users": 10, "train_ratio": 0.7,
//               "utc_offset_s": 0},
//     "model": {"dim": 32, "hidden": 32, "lr": 0.001, "epochs": 15,
//               "geohash_precision": 5, "leaky_slope": 0.01,
//               "attention_context": "all", "variant": "stod-ppa"},
//     "seed": 42
//   }
//
// Every section and key is optional; unknown keys are rejected. Relative
// data paths resolve against the config file's directory.
struct RunConfig {
  std::string trips_path;
  std::string locations_path;
  PrepareOptions prepare;
  ModelConfig model;

  void ValidatePaths() const;
};

RunConfig ParseRunConfig(const nlohmann::json& j, const std::string& base_dir = "");
RunConfig LoadRunConfig(const std::string& path);
nlohmann::json ToJson(const RunConfig& config);

nlohmann::json ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const nlohmann::json& j, ModelConfig base = {});

// Synthetic generator config, same conventions.
synth::SynthConfig ParseSynthConfig(const nlohmann::json& j);
synth::SynthConfig LoadSynthConfig(const std::string& path);

// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
std::string ConfigHash(const nlohmann::json& j);

}  // namespace stodppa

#endif  // STODPPA_RUN_CONFIG_H_
