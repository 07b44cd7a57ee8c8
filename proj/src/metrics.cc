#include "stodppa/metrics.h"

#include <algorithm>

#include "stodppa/errors.h"

namespace stodppa {

int AccAtK(std::span<const int> ranking, int truth, int k, int n_locations) {
  if (k <= 0) throw ContractError("k must be positive");
  if (truth < 0 || truth >= n_locations) {
    throw ContractError("truth location not in the location set");
  }
  if (static_cast<int>(ranking.size()) < k) throw ContractError("ranking shorter than k");
  const auto top = ranking.first(k);
  return std::find(top.begin(), top.end(), truth) != top.end() ? 1 : 0;
}

double AveragePrecisionAtRank(int rank) {
  if (rank < 1) throw ContractError("rank must be >= 1");
  return 1.0 / rank;
}

double MeanAveragePrecision(std::span<const int> ranks) {
  if (ranks.empty()) return 0.0;
  double sum = 0.0;
  for (int r : ranks) sum += AveragePrecisionAtRank(r);
  return sum / static_cast<double>(ranks.size());
}

void MetricAccumulator::Add(int rank) {
  if (rank < 1) throw ContractError("rank must be >= 1");
  ++count_;
  if (rank <= 1) ++hits1_;
  if (rank <= 5) ++hits5_;
  if (rank <= 10) ++hits10_;
  rr_sum_ += 1.0 / rank;
}

}  // namespace stodppa
