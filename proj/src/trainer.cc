#include "stodppa/trainer.h"

#include <algorithm>
#include <numeric>

#include "stodppa/optim.h"

namespace stodppa {

TrainResult Train(TrainableModel& model, const Corpus& train, const TrainOptions& options) {
  nn::ParamStore& params = model.params();
  nn::Adam adam(params, {.lr = options.lr});
  nn::Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<int> order;
  for (int u = 0; u < train.num_users(); ++u) {
    if (train.trips_by_user[u].size() >= 2) order.push_back(u);
  }

  TrainResult result;
  params.ZeroGrad();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int counted = 0;
    for (int u : order) {
      nn::Tape tape(params);
      const nn::Var loss = model.UserLoss(tape, u, train.trips_by_user[u]);
      if (!loss.valid()) continue;
      const double value = tape.scalar(loss);
      if (result.steps == 0) result.first_loss = value;
      tape.Backward(loss);
      adam.Step(params);
      ++result.steps;
      total += value;
      ++counted;
    }
    const double mean = counted > 0 ? total / counted : 0.0;
    result.epoch_loss.push_back(mean);
    if (options.on_epoch) options.on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace stodppa
