#ifndef STODPPA_TRAINER_H_
#define STODPPA_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stodppa/dataset.h"
#include "stodppa/tape.h"

namespace stodppa {

// A model trained one user at a time.
class TrainableModel {
 public:
  virtual ~TrainableModel() = default;
  virtual nn::ParamStore& params() = 0;
  // Mean cross-entropy over the user's training examples, recorded on
  // `tape`. Returns an invalid Var when the user has nothing to train on.
  virtual nn::Var UserLoss(nn::Tape& tape, int user, std::span<const Trip> trips) const = 0;
};

struct TrainOptions {
  int epochs = 15;
  double lr = 1e-4;
  std::uint64_t seed = 42;
  // Called after every epoch with (epoch, mean user loss).
  std::function<void(int, double)> on_epoch;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean over users, per epoch
  double first_loss = 0.0;         // first user of the first epoch, before any update
  long steps = 0;
};

// Users are visited in a seed-shuffled order each epoch with one Adam step
// per user. Users with fewer than two trips are skipped.
TrainResult Train(TrainableModel& model, const Corpus& train, const TrainOptions& options);

}  // namespace stodppa

#endif  // STODPPA_TRAINER_H_
