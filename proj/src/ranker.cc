#include "stodppa/ranker.h"

#include <algorithm>

#include "stodppa/errors.h"

namespace stodppa {

std::vector<ScoredLocation> RankTopK(std::span<const double> scores, int k) {
  std::vector<ScoredLocation> all;
  all.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    all.push_back({static_cast<int>(i), scores[i]});
  }
  k = std::clamp(k, 0, static_cast<int>(all.size()));
  auto better = [](const ScoredLocation& a, const ScoredLocation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.loc < b.loc;
  };
  std::partial_sort(all.begin(), all.begin() + k, all.end(), better);
  all.resize(k);
  return all;
}

int RankOf(std::span<const double> scores, int truth) {
  if (truth < 0 || static_cast<std::size_t>(truth) >= scores.size()) {
    throw ContractError("truth location out of range");
  }
  const double t = scores[truth];
  int rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > t || (scores[i] == t && static_cast<int>(i) < truth)) ++rank;
  }
  return rank;
}

}  // namespace stodppa
