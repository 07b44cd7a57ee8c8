#ifndef STODPPA_CHECKPOINT_H_
#define STODPPA_CHECKPOINT_H_

#include <memory>
#include <string>
#include <vector>

#include "stodppa/dataset.h"
#include "stodppa/model.h"

namespace stodppa {

inline constexpr int kCheckpointVersion = 1;

// File layout:
//
//   STODPPA-CHECKPOINT\n
//   version <int>\n
//   header_bytes <int>\n
//   <JSON header, header_bytes long>
//   <payload: float64 little-endian values>
//
// The header holds the model config, vocabulary, location and user ids,
// interval-table scale constants, and a tensor index of {name, shape,
// offset} into the payload. Parameters are named as in the ParamStore;
// interval tables are "tables.spatial"/"tables.temporal"; cached encodings
// are "cache.<user index>" with shape [2 * steps, width].
struct CheckpointData {
  std::unique_ptr<StodPpaModel> model;
  std::vector<LocationRecord> locations;
  std::vector<std::string> users;
  bool has_cache = false;
};

std::string SerializeCheckpoint(const StodPpaModel& model,
                                const std::vector<LocationRecord>& locations,
                                const std::vector<std::string>& users, bool with_cache);
CheckpointData DeserializeCheckpoint(const std::string& bytes);

void SaveCheckpoint(const std::string& path, const StodPpaModel& model,
                    const std::vector<LocationRecord>& locations,
                    const std::vector<std::string>& users, bool with_cache = true);
CheckpointData LoadCheckpoint(const std::string& path);

}  // namespace stodppa

#endif  // STODPPA_CHECKPOINT_H_
