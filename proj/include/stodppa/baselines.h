#ifndef STODPPA_BASELINES_H_
#define STODPPA_BASELINES_H_

#include <cstdint>
#include <vector>

#include "stodppa/dataset.h"
#include "stodppa/ranker.h"
#include "stodppa/stlstm.h"
#include "stodppa/trainer.h"

namespace stodppa {

// Destination counts over the training partition.
class FrequencyModel {
 public:
  FrequencyModel() = default;
  explicit FrequencyModel(const Corpus& train);

  int num_locations() const { return static_cast<int>(global_.size()); }
  const std::vector<long>& global_counts() const { return global_; }
  // Zero counts for users outside the training corpus.
  std::vector<long> user_counts(int user) const;
  long user_total(int user) const;
  long global_total() const { return global_total_; }

 private:
  std::vector<long> global_;
  std::vector<std::vector<long>> per_user_;
  long global_total_ = 0;
};

// Global destination popularity; the same list for every query.
class TopRanker : public Ranker {
 public:
  explicit TopRanker(const FrequencyModel& model) : model_(&model) {}
  std::string name() const override { return "top"; }
  std::vector<double> Scores(const Query& query) const override;

 private:
  const FrequencyModel* model_;
};

// The user's own destinations by count, then the remaining locations in
// global order.
class UserTopRanker : public Ranker {
 public:
  explicit UserTopRanker(const FrequencyModel& model) : model_(&model) {}
  std::string name() const override { return "u-top"; }
  std::vector<double> Scores(const Query& query) const override;

 private:
  const FrequencyModel* model_;
};

// lambda * user proportion + (1 - lambda) * global proportion.
class TaxiRanker : public Ranker {
 public:
  explicit TaxiRanker(const FrequencyModel& model, double lambda = 0.5);
  std::string name() const override { return "taxi"; }
  std::vector<double> Scores(const Query& query) const override;

 private:
  const FrequencyModel* model_;
  double lambda_;
};

struct OdLstmConfig {
  int dim = 32;
  int hidden = 32;
  double lr = 1e-3;
  int epochs = 15;
  std::uint64_t seed = 42;
};

// Plain LSTM over the trip sequence fed (o_j || d_{j-1}) at step j, with a
// softmax head over all locations.
class OdLstmBaseline : public TrainableModel, public Ranker {
 public:
  OdLstmBaseline(OdLstmConfig config, int n_locations);

  nn::ParamStore& params() override { return params_; }
  const nn::ParamStore& params() const { return params_; }
  const OdLstmConfig& config() const { return config_; }

  nn::Var UserLoss(nn::Tape& tape, int user, std::span<const Trip> trips) const override;
  TrainResult Fit(const Corpus& train);

  std::string name() const override { return "od-lstm"; }
  // Runs the LSTM over the whole history, then the query step.
  std::vector<double> Scores(const Query& query) const override;

 private:
  nn::Var StepInput(nn::Tape& tape, int origin, int prev_dest) const;

  OdLstmConfig config_;
  int n_locations_;
  nn::ParamStore params_;
  nn::ParamId w_l_ = -1;
  nn::ParamId w_loc_ = -1;
  LstmWeights lstm_;
};

}  // namespace stodppa

#endif  // STODPPA_BASELINES_H_
