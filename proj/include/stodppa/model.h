#ifndef STODPPA_MODEL_H_
#define STODPPA_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stodppa/dataset.h"
#include "stodppa/ranker.h"
#include "stodppa/stlstm.h"
#include "stodppa/trainer.h"

namespace stodppa {

enum class Variant {
  kStodPpa,      // ST-LSTM encoders + personalized preference attention
  kOdPpa,        // plain LSTM encoders
  kEncoderOnly,  // y = h^o_current || h^d_previous, no attention
  kDecoderOnly,  // attention directly over raw location embeddings
  kUserAdd,      // unpersonalized attention, y + u
  kUserConcat,   // unpersonalized attention, y || u
};

enum class AttentionContext {
  kAll,     // every encoded state of the user
  kCausal,  // training example j attends only to states of steps <= j
};

std::string VariantName(Variant v);
Variant ParseVariant(const std::string& name);
std::string AttentionContextName(AttentionContext c);
AttentionContext ParseAttentionContext(const std::string& name);

struct ModelConfig {
  int dim = 256;
  int hidden = 256;
  double lr = 1e-4;
  int epochs = 15;
  int geohash_precision = 5;
  int n_timeslots = geo::kNumTimeslots;
  double leaky_slope = 0.01;
  std::uint64_t seed = 42;
  AttentionContext attention_context = AttentionContext::kAll;
  Variant variant = Variant::kStodPpa;

  // dim = hidden = 32, lr = 1e-3.
  static ModelConfig DeskScale();
  void Validate() const;
};

// Encoded states of one user: origin-encoder states first, then
// destination-encoder states, both in timestep order.
struct UserEncoding {
  std::vector<std::vector<double>> states;
  // Location behind each state, same order as `states`.
  std::vector<int> locs;

  std::size_t steps() const { return states.size() / 2; }
  bool is_origin(std::size_t i) const { return i < steps(); }
  std::size_t timestep(std::size_t i) const { return i < steps() ? i : i - steps(); }
};

using EncodedCache = std::map<int, UserEncoding>;

struct Prediction {
  std::vector<double> probs;
  // One weight vector per attended state; empty when the variant has no
  // attention.
  std::vector<std::vector<double>> attention;
  // Location behind each attended state, origin-encoder states first.
  std::vector<int> state_locs;
};

class StodPpaModel : public TrainableModel, public Ranker {
 public:
  StodPpaModel(ModelConfig config, Vocab vocab, IntervalTables tables);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  const IntervalTables& tables() const { return tables_; }
  nn::ParamStore& params() override { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // Width of an encoded state: hidden, or dim for the decoder-only variant.
  int state_width() const;

  StLstmInput EmbedVisit(nn::Tape& tape, const Visit& visit) const;

  // h^O followed by h^D on the tape. Sequences must have equal length.
  std::vector<nn::Var> EncodeStates(nn::Tape& tape, const EncoderSequences& seq) const;
  UserEncoding EncodeUser(std::span<const Trip> trips) const;

  nn::Var UserLoss(nn::Tape& tape, int user, std::span<const Trip> trips) const override;

  // Encodes every user with at least two trips. Later predictions for those
  // users read the cache instead of running the encoders.
  void BuildCache(const Corpus& train);
  const EncodedCache& cache() const { return cache_; }
  void set_cache(EncodedCache cache) { cache_ = std::move(cache); }

  // Distribution over next destinations for a known user, from the cache.
  Prediction PredictCached(int user, int origin, int prev_dest) const;
  // Same query with the user's encoding supplied by the caller.
  Prediction PredictWith(std::span<const double> user_emb, const UserEncoding& enc, int origin,
                         int prev_dest) const;
  // Resolves cache, history encoding and cold-start embedding as needed.
  Prediction Predict(const Query& query) const;

  std::vector<ScoredLocation> Recommend(const Query& query, int k) const;

  std::string name() const override { return VariantName(config_.variant); }
  std::vector<double> Scores(const Query& query) const override { return Predict(query).probs; }

  // Mean of the trained user embeddings, used for users absent from W_U.
  std::vector<double> ColdStartUserEmbedding() const;
  std::vector<double> UserEmbedding(int user) const;

  TrainResult Fit(const Corpus& train, std::function<void(int, double)> on_epoch = {});

  struct ParamIds {
    nn::ParamId w_l = -1, w_g = -1, w_t = -1, w_u = -1, w_a = -1, w_loc = -1;
  };
  const ParamIds& ids() const { return ids_; }
  const StLstmWeights& origin_encoder() const { return st_origin_; }
  const StLstmWeights& dest_encoder() const { return st_dest_; }

 private:
  bool uses_st_lstm() const;
  bool personalized_attention() const;
  int query_width() const;
  nn::Var UserVar(nn::Tape& tape, int user, std::span<const double> emb) const;
  // Decoder head for one query given its attention context.
  nn::Var DecodeLogits(nn::Tape& tape, nn::Var user_emb, int origin, int prev_dest,
                       std::span<const nn::Var> keys, std::span<const nn::Var> values,
                       nn::Var* attended) const;
  std::vector<nn::Var> Keys(nn::Tape& tape, std::span<const nn::Var> states) const;
  // Encoder input sequences for a history plus the current origin visit.
  EncoderSequences QuerySequences(const Query& query) const;

  ModelConfig config_;
  Vocab vocab_;
  IntervalTables tables_;
  nn::ParamStore params_;
  ParamIds ids_;
  StLstmWeights st_origin_, st_dest_;
  LstmWeights lstm_origin_, lstm_dest_;
  EncodedCache cache_;
};

}  // namespace stodppa

#endif  // STODPPA_MODEL_H_
