#ifndef STODPPA_RANKER_H_
#define STODPPA_RANKER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stodppa/dataset.h"

namespace stodppa {

// One next-destination query. `history` holds every earlier trip of the
// user in chronological order; the current trip contributes only its origin
// and pickup time.
struct Query {
  int user = -1;  // model user index, -1 for a user unknown to the model
  int origin = 0;
  int prev_dest = 0;
  std::int64_t pickup_ts = 0;
  std::span<const Trip> history;
};

struct ScoredLocation {
  int loc = 0;
  double score = 0.0;
};

class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual std::string name() const = 0;
  // One score per location; higher ranks first.
  virtual std::vector<double> Scores(const Query& query) const = 0;
};

// Descending score, ties by ascending location index.
std::vector<ScoredLocation> RankTopK(std::span<const double> scores, int k);

// 1-based position of `truth` under the RankTopK order, without sorting.
int RankOf(std::span<const double> scores, int truth);

}  // namespace stodppa

#endif  // STODPPA_RANKER_H_
