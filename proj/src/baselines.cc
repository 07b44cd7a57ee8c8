#include "stodppa/baselines.h"

#include "stodppa/errors.h"
#include "stodppa/optim.h"

namespace stodppa {

FrequencyModel::FrequencyModel(const Corpus& train)
    : global_(train.num_locations(), 0), per_user_(train.num_users()) {
  for (int u = 0; u < train.num_users(); ++u) {
    per_user_[u].assign(train.num_locations(), 0);
    for (const Trip& t : train.trips_by_user[u]) {
      ++per_user_[u][t.dest];
      ++global_[t.dest];
      ++global_total_;
    }
  }
}

std::vector<long> FrequencyModel::user_counts(int user) const {
  if (user < 0 || user >= static_cast<int>(per_user_.size())) {
    return std::vector<long>(global_.size(), 0);
  }
  return per_user_[user];
}

long FrequencyModel::user_total(int user) const {
  long total = 0;
  for (long c : user_counts(user)) total += c;
  return total;
}

std::vector<double> TopRanker::Scores(const Query&) const {
  const auto& g = model_->global_counts();
  return {g.begin(), g.end()};
}

std::vector<double> UserTopRanker::Scores(const Query& query) const {
  const auto& g = model_->global_counts();
  const std::vector<long> mine = model_->user_counts(query.user);
  // Visited locations score their count (>= 1); the rest a global share
  // strictly below 1.
  const double denom = static_cast<double>(model_->global_total()) + 1.0;
  std::vector<double> scores(g.size());
  for (std::size_t l = 0; l < g.size(); ++l) {
    scores[l] = mine[l] > 0 ? static_cast<double>(mine[l]) : static_cast<double>(g[l]) / denom;
  }
  return scores;
}

TaxiRanker::TaxiRanker(const FrequencyModel& model, double lambda)
    : model_(&model), lambda_(lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ContractError("lambda must be in [0, 1]");
}

std::vector<double> TaxiRanker::Scores(const Query& query) const {
  const auto& g = model_->global_counts();
  const std::vector<long> mine = model_->user_counts(query.user);
  const double g_total = static_cast<double>(model_->global_total());
  const double u_total = static_cast<double>(model_->user_total(query.user));
  std::vector<double> scores(g.size());
  for (std::size_t l = 0; l < g.size(); ++l) {
    const double gp = g_total > 0 ? g[l] / g_total : 0.0;
    const double up = u_total > 0 ? mine[l] / u_total : 0.0;
    scores[l] = lambda_ * up + (1.0 - lambda_) * gp;
  }
  return scores;
}

OdLstmBaseline::OdLstmBaseline(OdLstmConfig config, int n_locations)
    : config_(config), n_locations_(n_locations) {
  if (config_.dim <= 0 || config_.hidden <= 0) throw ContractError("sizes must be positive");
  if (n_locations <= 0) throw ContractError("need at least one location");
  nn::Rng rng(config_.seed);
  w_l_ = params_.Add("W_L", nn::UniformTensor({n_locations, config_.dim}, 0.1, rng));
  lstm_ = RegisterLstm(params_, "lstm", 2 * config_.dim, config_.hidden, rng);
  w_loc_ = params_.Add("W_loc", nn::GlorotUniform(config_.hidden, n_locations, rng));
}

nn::Var OdLstmBaseline::StepInput(nn::Tape& tape, int origin, int prev_dest) const {
  return tape.Concat({tape.Row(w_l_, origin), tape.Row(w_l_, prev_dest)});
}

nn::Var OdLstmBaseline::UserLoss(nn::Tape& tape, int, std::span<const Trip> trips) const {
  if (trips.size() < 2) return {};
  std::vector<nn::Var> inputs;
  for (std::size_t j = 1; j < trips.size(); ++j) {
    inputs.push_back(StepInput(tape, trips[j].origin, trips[j - 1].dest));
  }
  const std::vector<nn::Var> hs = LstmEncode(tape, lstm_, inputs);
  std::vector<nn::Var> losses;
  for (std::size_t j = 1; j < trips.size(); ++j) {
    losses.push_back(
        tape.SoftmaxCrossEntropy(tape.MatVec(w_loc_, hs[j - 1]), trips[j].dest));
  }
  return tape.SumScalars(losses, 1.0 / static_cast<double>(losses.size()));
}

TrainResult OdLstmBaseline::Fit(const Corpus& train) {
  TrainOptions options;
  options.epochs = config_.epochs;
  options.lr = config_.lr;
  options.seed = config_.seed;
  return Train(*this, train, options);
}

std::vector<double> OdLstmBaseline::Scores(const Query& query) const {
  if (query.origin < 0 || query.origin >= n_locations_ || query.prev_dest < 0 ||
      query.prev_dest >= n_locations_) {
    throw ContractError("query location out of range");
  }
  nn::Tape tape(params_);
  std::vector<nn::Var> inputs;
  const auto& h = query.history;
  for (std::size_t j = 1; j < h.size(); ++j) {
    inputs.push_back(StepInput(tape, h[j].origin, h[j - 1].dest));
  }
  inputs.push_back(StepInput(tape, query.origin, query.prev_dest));
  const std::vector<nn::Var> hs = LstmEncode(tape, lstm_, inputs);
  const auto probs = tape.value(tape.Softmax(tape.MatVec(w_loc_, hs.back())));
  return {probs.begin(), probs.end()};
}

}  // namespace stodppa
