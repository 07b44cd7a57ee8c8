#ifndef STODPPA_METRICS_H_
#define STODPPA_METRICS_H_

#include <span>
#include <vector>

namespace stodppa {

// 1 when `truth` is among the first k entries of `ranking`, else 0.
// `ranking` may be a prefix of a full ranking over `n_locations` locations;
// a truth outside [0, n_locations) is a contract violation.
int AccAtK(std::span<const int> ranking, int truth, int k, int n_locations);

// Single relevant item: AP = 1 / rank (1-based).
double AveragePrecisionAtRank(int rank);

// Mean of 1 / rank over queries; 0 for an empty set.
double MeanAveragePrecision(std::span<const int> ranks);

// Running Acc@{1,5,10} and MAP from 1-based truth ranks.
class MetricAccumulator {
 public:
  void Add(int rank);
  long count() const { return count_; }
  double acc1() const { return Mean(hits1_); }
  double acc5() const { return Mean(hits5_); }
  double acc10() const { return Mean(hits10_); }
  double map() const { return count_ == 0 ? 0.0 : rr_sum_ / count_; }

 private:
  double Mean(long hits) const { return count_ == 0 ? 0.0 : static_cast<double>(hits) / count_; }

  long count_ = 0;
  long hits1_ = 0;
  long hits5_ = 0;
  long hits10_ = 0;
  double rr_sum_ = 0.0;
};

}  // namespace stodppa

#endif  // STODPPA_METRICS_H_
