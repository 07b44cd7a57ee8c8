#include "stodppa/model.h"

#include <algorithm>

#include "stodppa/errors.h"

namespace stodppa {
namespace {

using nn::Tape;
using nn::Var;

std::vector<int> SequenceLocs(const EncoderSequences& seq) {
  std::vector<int> locs;
  for (const Visit& v : seq.origins) locs.push_back(v.loc);
  for (const Visit& v : seq.dests) locs.push_back(v.loc);
  return locs;
}

constexpr double kEmbeddingInit = 0.1;

}  // namespace

std::string VariantName(Variant v) {
  switch (v) {
    case Variant::kStodPpa: return "stod-ppa";
    case Variant::kOdPpa: return "od-ppa";
    case Variant::kEncoderOnly: return "encoder-only";
    case Variant::kDecoderOnly: return "decoder-only";
    case Variant::kUserAdd: return "user-add";
    case Variant::kUserConcat: return "user-concat";
  }
  return "unknown";
}

Variant ParseVariant(const std::string& name) {
  for (Variant v : {Variant::kStodPpa, Variant::kOdPpa, Variant::kEncoderOnly,
                    Variant::kDecoderOnly, Variant::kUserAdd, Variant::kUserConcat}) {
    if (VariantName(v) == name) return v;
  }
  throw ContractError("unknown model variant '" + name + "'");
}

std::string AttentionContextName(AttentionContext c) {
  return c == AttentionContext::kAll ? "all" : "causal";
}

AttentionContext ParseAttentionContext(const std::string& name) {
  if (name == "all") return AttentionContext::kAll;
  if (name == "causal") return AttentionContext::kCausal;
  throw ContractError("unknown attention context '" + name + "'");
}

ModelConfig ModelConfig::DeskScale() {
  ModelConfig c;
  c.dim = 32;
  c.hidden = 32;
  c.lr = 1e-3;
  return c;
}

void ModelConfig::Validate() const {
  if (dim <= 0 || hidden <= 0) throw ContractError("dim and hidden must be positive");
  if (!(lr > 0.0)) throw ContractError("learning rate must be positive");
  if (epochs < 0) throw ContractError("epochs must be non-negative");
  if (geohash_precision < 1 || geohash_precision > 12) {
    throw ContractError("geohash precision must be in [1, 12]");
  }
  if (n_timeslots != geo::kNumTimeslots) throw ContractError("exactly 8 timeslots are supported");
  if (!(leaky_slope >= 0.0)) throw ContractError("leaky slope must be non-negative");
}

StodPpaModel::StodPpaModel(ModelConfig config, Vocab vocab, IntervalTables tables)
    : config_(config), vocab_(std::move(vocab)), tables_(std::move(tables)) {
  config_.Validate();
  if (tables_.n != vocab_.n_locations) throw ContractError("interval tables do not match vocab");
  if (static_cast<int>(vocab_.loc_geohash.size()) != vocab_.n_locations) {
    throw ContractError("vocab geohash map does not cover every location");
  }
  nn::Rng rng(config_.seed);
  const int dim = config_.dim;
  const int hidden = config_.hidden;
  const int n_loc = vocab_.n_locations;
  const Variant v = config_.variant;

  ids_.w_l = params_.Add("W_L", nn::UniformTensor({n_loc, dim}, kEmbeddingInit, rng));
  if (uses_st_lstm()) {
    ids_.w_g = params_.Add("W_G", nn::UniformTensor({vocab_.n_geohashes, dim}, kEmbeddingInit, rng));
    ids_.w_t = params_.Add("W_T", nn::UniformTensor({vocab_.n_timeslots, dim}, kEmbeddingInit, rng));
  }
  if (v != Variant::kEncoderOnly) {
    const int user_width = v == Variant::kUserAdd ? hidden : dim;
    ids_.w_u = params_.Add("W_U", nn::UniformTensor({vocab_.n_users, user_width}, kEmbeddingInit, rng));
  }
  if (uses_st_lstm()) {
    st_origin_ = RegisterStLstm(params_, "enc_o", dim, hidden, n_loc, rng);
    st_dest_ = RegisterStLstm(params_, "enc_d", dim, hidden, n_loc, rng);
  } else if (v == Variant::kOdPpa) {
    lstm_origin_ = RegisterLstm(params_, "enc_o", dim, hidden, rng);
    lstm_dest_ = RegisterLstm(params_, "enc_d", dim, hidden, rng);
  }
  const int width = state_width();
  if (v != Variant::kEncoderOnly) {
    ids_.w_a = params_.Add("W_A", nn::GlorotUniform(query_width() + width, width, rng));
  }
  int head_in = width;
  if (v == Variant::kEncoderOnly) head_in = 2 * width;
  if (v == Variant::kUserConcat) head_in = width + dim;
  ids_.w_loc = params_.Add("W_loc", nn::GlorotUniform(head_in, n_loc, rng));
}

bool StodPpaModel::uses_st_lstm() const {
  const Variant v = config_.variant;
  return v == Variant::kStodPpa || v == Variant::kEncoderOnly || v == Variant::kUserAdd ||
         v == Variant::kUserConcat;
}

bool StodPpaModel::personalized_attention() const {
  const Variant v = config_.variant;
  return v == Variant::kStodPpa || v == Variant::kOdPpa || v == Variant::kDecoderOnly;
}

int StodPpaModel::state_width() const {
  return config_.variant == Variant::kDecoderOnly ? config_.dim : config_.hidden;
}

int StodPpaModel::query_width() const {
  return (personalized_attention() ? 3 : 2) * config_.dim;
}

StLstmInput StodPpaModel::EmbedVisit(Tape& tape, const Visit& visit) const {
  if (visit.loc < 0 || visit.loc >= vocab_.n_locations) {
    throw ContractError("visit location out of range");
  }
  if (visit.slot < 0 || visit.slot >= vocab_.n_timeslots) {
    throw ContractError("visit timeslot out of range");
  }
  StLstmInput in;
  in.loc = tape.Row(ids_.w_l, visit.loc);
  if (uses_st_lstm()) {
    in.geo = tape.Row(ids_.w_g, vocab_.loc_geohash[visit.loc]);
    in.slot = tape.Row(ids_.w_t, visit.slot);
    in.spatial_row = tape.Constant(tables_.SpatialRow(visit.loc));
    in.temporal_row = tape.Constant(tables_.TemporalRow(visit.loc));
  }
  return in;
}

std::vector<Var> StodPpaModel::EncodeStates(Tape& tape, const EncoderSequences& seq) const {
  if (seq.origins.size() != seq.dests.size()) {
    throw ContractError("origin and destination sequences differ in length");
  }
  std::vector<Var> states;
  auto encode = [&](const std::vector<Visit>& visits, bool origin_side) {
    std::vector<Var> out;
    if (uses_st_lstm()) {
      std::vector<StLstmInput> inputs;
      for (const Visit& v : visits) inputs.push_back(EmbedVisit(tape, v));
      out = StLstmEncode(tape, origin_side ? st_origin_ : st_dest_, inputs);
    } else {
      std::vector<Var> inputs;
      for (const Visit& v : visits) inputs.push_back(EmbedVisit(tape, v).loc);
      out = config_.variant == Variant::kOdPpa
                ? LstmEncode(tape, origin_side ? lstm_origin_ : lstm_dest_, inputs)
                : inputs;
    }
    states.insert(states.end(), out.begin(), out.end());
  };
  encode(seq.origins, true);
  encode(seq.dests, false);
  return states;
}

UserEncoding StodPpaModel::EncodeUser(std::span<const Trip> trips) const {
  const EncoderSequences seq = BuildEncoderSequences(trips, vocab_.utc_offset_s);
  Tape tape(params_);
  UserEncoding enc;
  for (Var v : EncodeStates(tape, seq)) {
    const auto values = tape.value(v);
    enc.states.emplace_back(values.begin(), values.end());
  }
  enc.locs = SequenceLocs(seq);
  return enc;
}

std::vector<Var> StodPpaModel::Keys(Tape& tape, std::span<const Var> states) const {
  std::vector<Var> keys;
  keys.reserve(states.size());
  for (Var h : states) keys.push_back(tape.MatVec(ids_.w_a, h, query_width()));
  return keys;
}

Var StodPpaModel::DecodeLogits(Tape& tape, Var user_emb, int origin, int prev_dest,
                               std::span<const Var> keys, std::span<const Var> values,
                               Var* attended) const {
  Var o = tape.Row(ids_.w_l, origin);
  Var d = tape.Row(ids_.w_l, prev_dest);
  Var query = personalized_attention() ? tape.Concat({user_emb, o, d}) : tape.Concat({o, d});
  Var y = tape.AttendPerDim(tape.MatVec(ids_.w_a, query), keys, values, config_.leaky_slope);
  if (attended != nullptr) *attended = y;
  if (config_.variant == Variant::kUserAdd) y = tape.Add({y, user_emb});
  if (config_.variant == Variant::kUserConcat) y = tape.Concat({y, user_emb});
  return tape.MatVec(ids_.w_loc, y);
}

Var StodPpaModel::UserVar(Tape& tape, int user, std::span<const double> emb) const {
  if (ids_.w_u < 0) return tape.Zeros(0);
  if (user >= 0) return tape.Row(ids_.w_u, user);
  return tape.Constant(emb);
}

Var StodPpaModel::UserLoss(Tape& tape, int user, std::span<const Trip> trips) const {
  if (trips.size() < 2) return {};
  const EncoderSequences seq = BuildEncoderSequences(trips, vocab_.utc_offset_s);
  const std::vector<TrainingExample> examples = BuildTrainingExamples(user, trips);
  const std::vector<Var> states = EncodeStates(tape, seq);
  const std::size_t n = seq.origins.size();

  std::vector<Var> losses;
  losses.reserve(examples.size());
  if (config_.variant == Variant::kEncoderOnly) {
    for (std::size_t e = 0; e < n; ++e) {
      Var logits = tape.MatVec(ids_.w_loc, tape.Concat({states[e], states[n + e]}));
      losses.push_back(tape.SoftmaxCrossEntropy(logits, examples[e].target));
    }
  } else {
    const Var u = UserVar(tape, user, {});
    const std::vector<Var> keys = Keys(tape, states);
    std::vector<Var> ctx_keys, ctx_values;
    for (std::size_t e = 0; e < n; ++e) {
      std::span<const Var> k = keys;
      std::span<const Var> h = states;
      if (config_.attention_context == AttentionContext::kCausal) {
        ctx_keys.assign(keys.begin(), keys.begin() + e + 1);
        ctx_keys.insert(ctx_keys.end(), keys.begin() + n, keys.begin() + n + e + 1);
        ctx_values.assign(states.begin(), states.begin() + e + 1);
        ctx_values.insert(ctx_values.end(), states.begin() + n, states.begin() + n + e + 1);
        k = ctx_keys;
        h = ctx_values;
      }
      const TrainingExample& ex = examples[e];
      Var logits = DecodeLogits(tape, u, ex.origin, ex.prev_dest, k, h, nullptr);
      losses.push_back(tape.SoftmaxCrossEntropy(logits, ex.target));
    }
  }
  return tape.SumScalars(losses, 1.0 / static_cast<double>(losses.size()));
}

void StodPpaModel::BuildCache(const Corpus& train) {
  cache_.clear();
  for (int u = 0; u < train.num_users(); ++u) {
    if (train.trips_by_user[u].size() < 2) continue;
    cache_[u] = EncodeUser(train.trips_by_user[u]);
  }
}

std::vector<double> StodPpaModel::UserEmbedding(int user) const {
  if (ids_.w_u < 0) return {};
  const nn::Tensor& w = params_.value(ids_.w_u);
  if (user < 0 || user >= w.rows()) throw ContractError("user index out of range");
  const auto row = w.row(user);
  return {row.begin(), row.end()};
}

std::vector<double> StodPpaModel::ColdStartUserEmbedding() const {
  if (ids_.w_u < 0) return {};
  const nn::Tensor& w = params_.value(ids_.w_u);
  std::vector<double> mean(w.cols(), 0.0);
  if (w.rows() == 0) return mean;
  for (int r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    for (int c = 0; c < w.cols(); ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= w.rows();
  return mean;
}

Prediction StodPpaModel::PredictWith(std::span<const double> user_emb, const UserEncoding& enc,
                                     int origin, int prev_dest) const {
  if (enc.states.empty() || enc.states.size() % 2 != 0) {
    throw ContractError("user encoding must hold a non-empty, even number of states");
  }
  Tape tape(params_);
  std::vector<Var> states;
  states.reserve(enc.states.size());
  for (const auto& s : enc.states) {
    if (static_cast<int>(s.size()) != state_width()) throw ContractError("state width mismatch");
    states.push_back(tape.Constant(s));
  }
  Prediction pred;
  Var logits;
  if (config_.variant == Variant::kEncoderOnly) {
    const std::size_t n = enc.steps();
    if (origin < 0 || origin >= vocab_.n_locations || prev_dest < 0 ||
        prev_dest >= vocab_.n_locations) {
      throw ContractError("query location out of range");
    }
    logits = tape.MatVec(ids_.w_loc, tape.Concat({states[n - 1], states[2 * n - 1]}));
  } else {
    Var u = tape.Constant(user_emb);
    Var attended;
    logits = DecodeLogits(tape, u, origin, prev_dest, Keys(tape, states), states, &attended);
    pred.attention = tape.AttentionWeights(attended);
    pred.state_locs = enc.locs;
  }
  const auto probs = tape.value(tape.Softmax(logits));
  pred.probs.assign(probs.begin(), probs.end());
  return pred;
}

Prediction StodPpaModel::PredictCached(int user, int origin, int prev_dest) const {
  const auto it = cache_.find(user);
  if (it == cache_.end()) throw ColdStartError("user has no cached encoding");
  return PredictWith(UserEmbedding(user), it->second, origin, prev_dest);
}

EncoderSequences StodPpaModel::QuerySequences(const Query& query) const {
  EncoderSequences seq;
  const auto& h = query.history;
  if (h.empty()) return seq;
  for (std::size_t j = 0; j < h.size(); ++j) {
    const bool last = j + 1 == h.size();
    const int origin = last ? query.origin : h[j + 1].origin;
    const std::int64_t ts = last ? query.pickup_ts : h[j + 1].pickup_ts;
    seq.origins.push_back({origin, vocab_.Slot(ts)});
    seq.dests.push_back({h[j].dest, vocab_.Slot(h[j].dropoff_ts)});
  }
  return seq;
}

Prediction StodPpaModel::Predict(const Query& query) const {
  if (query.user >= vocab_.n_users) throw ContractError("user index out of range");
  if (config_.variant != Variant::kEncoderOnly && query.user >= 0 &&
      cache_.contains(query.user)) {
    return PredictCached(query.user, query.origin, query.prev_dest);
  }
  const EncoderSequences seq = QuerySequences(query);
  if (seq.origins.empty()) {
    throw ColdStartError(
        "user has no cached encoding and no history; supply prior trips for cold-start "
        "prediction");
  }
  UserEncoding enc;
  {
    Tape tape(params_);
    for (Var v : EncodeStates(tape, seq)) {
      const auto values = tape.value(v);
      enc.states.emplace_back(values.begin(), values.end());
    }
  }
  enc.locs = SequenceLocs(seq);
  const std::vector<double> user_emb =
      query.user >= 0 ? UserEmbedding(query.user) : ColdStartUserEmbedding();
  return PredictWith(user_emb, enc, query.origin, query.prev_dest);
}

std::vector<ScoredLocation> StodPpaModel::Recommend(const Query& query, int k) const {
  return RankTopK(Predict(query).probs, k);
}

TrainResult StodPpaModel::Fit(const Corpus& train, std::function<void(int, double)> on_epoch) {
  TrainOptions options;
  options.epochs = config_.epochs;
  options.lr = config_.lr;
  options.seed = config_.seed;
  options.on_epoch = std::move(on_epoch);
  TrainResult result = Train(*this, train, options);
  BuildCache(train);
  return result;
}

}  // namespace stodppa
