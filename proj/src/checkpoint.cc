#include "stodppa/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stodppa/errors.h"
#include "stodppa/run_config.h"

namespace stodppa {
namespace {

using nlohmann::json;

constexpr char kMagic[] = "STODPPA-CHECKPOINT";

void AppendValues(std::string& payload, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    payload.append(bytes, 8);
  }
}

std::vector<double> ReadValues(const std::string& payload, std::size_t offset, std::size_t count) {
  if (offset + count * 8 > payload.size()) throw ParseError("checkpoint payload truncated");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[offset + i * 8 + b]))
              << (8 * b);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

struct TensorIndex {
  json entries = json::array();
  std::string payload;

  void Add(const std::string& name, const std::vector<int>& shape, std::span<const double> v) {
    entries.push_back({{"name", name}, {"shape", shape}, {"offset", payload.size()}});
    AppendValues(payload, v);
  }
};

std::size_t Count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ParseError("negative tensor dimension in checkpoint");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

std::string SerializeCheckpoint(const StodPpaModel& model,
                                const std::vector<LocationRecord>& locations,
                                const std::vector<std::string>& users, bool with_cache) {
  const Vocab& vocab = model.vocab();
  if (static_cast<int>(locations.size()) != vocab.n_locations ||
      static_cast<int>(users.size()) != vocab.n_users) {
    throw ContractError("location/user tables do not match the model vocabulary");
  }
  TensorIndex index;
  for (const nn::Param& p : model.params().params()) {
    index.Add(p.name, p.value.shape(), p.value.values());
  }
  const IntervalTables& tables = model.tables();
  index.Add("tables.spatial", {tables.n, tables.n}, tables.spatial);
  index.Add("tables.temporal", {tables.n, tables.n}, tables.temporal);
  json cache_locs = json::object();
  if (with_cache) {
    for (const auto& [user, enc] : model.cache()) {
      cache_locs[std::to_string(user)] = enc.locs;
      std::vector<double> flat;
      for (const auto& s : enc.states) flat.insert(flat.end(), s.begin(), s.end());
      const int width = enc.states.empty() ? 0 : static_cast<int>(enc.states[0].size());
      index.Add("cache." + std::to_string(user), {static_cast<int>(enc.states.size()), width},
                flat);
    }
  }

  json loc_json = json::array();
  for (const auto& l : locations) loc_json.push_back({l.id, l.point.lat, l.point.lon});
  json header = {
      {"config", ModelConfigToJson(model.config())},
      {"vocab",
       {{"n_locations", vocab.n_locations},
        {"n_users", vocab.n_users},
        {"n_geohashes", vocab.n_geohashes},
        {"n_timeslots", vocab.n_timeslots},
        {"geohash_precision", vocab.geohash_precision},
        {"utc_offset_s", vocab.utc_offset_s},
        {"loc_geohash", vocab.loc_geohash},
        {"geohash_codes", vocab.geohash_codes}}},
      {"locations", loc_json},
      {"users", users},
      {"tables", {{"spatial_scale_km", tables.spatial_scale_km},
                  {"temporal_scale_h", tables.temporal_scale_h}}},
      {"has_cache", with_cache},
      {"cache_locs", cache_locs},
      {"tensors", index.entries},
  };
  const std::string header_text = header.dump();
  std::ostringstream os;
  os << kMagic << '\n'
     << "version " << kCheckpointVersion << '\n'
     << "header_bytes " << header_text.size() << '\n'
     << header_text << index.payload;
  return os.str();
}

CheckpointData DeserializeCheckpoint(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw ParseError("not a checkpoint file");
  int version = 0;
  std::size_t header_bytes = 0;
  std::string word;
  if (!(in >> word >> version) || word != "version") throw ParseError("missing checkpoint version");
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  if (!(in >> word >> header_bytes) || word != "header_bytes") {
    throw ParseError("missing checkpoint header size");
  }
  in.get();  // newline
  const auto header_start = static_cast<std::size_t>(in.tellg());
  if (header_start + header_bytes > bytes.size()) throw ParseError("checkpoint header truncated");
  json header;
  try {
    header = json::parse(bytes.substr(header_start, header_bytes));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  const std::string payload = bytes.substr(header_start + header_bytes);

  CheckpointData out;
  try {
    const ModelConfig config = ModelConfigFromJson(header.at("config"));
    const json& v = header.at("vocab");
    Vocab vocab;
    vocab.n_locations = v.at("n_locations").get<int>();
    vocab.n_users = v.at("n_users").get<int>();
    vocab.n_geohashes = v.at("n_geohashes").get<int>();
    vocab.n_timeslots = v.at("n_timeslots").get<int>();
    vocab.geohash_precision = v.at("geohash_precision").get<int>();
    vocab.utc_offset_s = v.at("utc_offset_s").get<std::int64_t>();
    vocab.loc_geohash = v.at("loc_geohash").get<std::vector<int>>();
    vocab.geohash_codes = v.at("geohash_codes").get<std::vector<std::string>>();
    for (const auto& l : header.at("locations")) {
      out.locations.push_back({l.at(0).get<std::string>(), {l.at(1).get<double>(), l.at(2).get<double>()}});
    }
    out.users = header.at("users").get<std::vector<std::string>>();
    out.has_cache = header.at("has_cache").get<bool>();

    IntervalTables tables;
    tables.n = vocab.n_locations;
    tables.spatial_scale_km = header.at("tables").at("spatial_scale_km").get<double>();
    tables.temporal_scale_h = header.at("tables").at("temporal_scale_h").get<double>();

    std::vector<std::pair<json, std::vector<double>>> tensors;
    for (const json& t : header.at("tensors")) {
      const auto shape = t.at("shape").get<std::vector<int>>();
      tensors.emplace_back(t, ReadValues(payload, t.at("offset").get<std::size_t>(), Count(shape)));
    }
    auto take = [&](const std::string& name) -> std::vector<double>& {
      for (auto& [t, values] : tensors) {
        if (t.at("name") == name) return values;
      }
      throw ParseError("checkpoint is missing tensor " + name);
    };
    tables.spatial = take("tables.spatial");
    tables.temporal = take("tables.temporal");

    out.model = std::make_unique<StodPpaModel>(config, vocab, tables);
    for (nn::Param& p : out.model->params().params()) {
      std::vector<double>& values = take(p.name);
      if (values.size() != p.value.size()) throw ParseError("shape mismatch for " + p.name);
      p.value = nn::Tensor(p.value.shape(), std::move(values));
    }
    EncodedCache cache;
    for (auto& [t, values] : tensors) {
      const std::string name = t.at("name").get<std::string>();
      if (!name.starts_with("cache.")) continue;
      const auto shape = t.at("shape").get<std::vector<int>>();
      const int user = std::stoi(name.substr(6));
      UserEncoding enc;
      enc.locs = header.at("cache_locs").at(name.substr(6)).get<std::vector<int>>();
      for (int r = 0; r < shape.at(0); ++r) {
        enc.states.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(r) * shape.at(1),
                                values.begin() + static_cast<std::ptrdiff_t>(r + 1) * shape.at(1));
      }
      cache[user] = std::move(enc);
    }
    out.model->set_cache(std::move(cache));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint header: ") + e.what());
  }
  return out;
}

void SaveCheckpoint(const std::string& path, const StodPpaModel& model,
                    const std::vector<LocationRecord>& locations,
                    const std::vector<std::string>& users, bool with_cache) {
  const std::string bytes = SerializeCheckpoint(model, locations, users, with_cache);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

CheckpointData LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace stodppa
