#ifndef STODPPA_EVAL_H_
#define STODPPA_EVAL_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stodppa/dataset.h"
#include "stodppa/model.h"
#include "stodppa/ranker.h"

namespace stodppa {

struct EvalReport {
  std::string method;
  double acc1 = 0.0;
  double acc5 = 0.0;
  double acc10 = 0.0;
  double map = 0.0;
  long n_queries = 0;
  long skipped = 0;
  std::uint64_t seed = 0;
  std::optional<double> acc1_std;  // across seeds, when aggregated
  bool empty = false;              // no query could be evaluated

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// One query per test trip with the rolling previous destination. The query
// history is the user's train trips followed by the earlier test trips.
// Queries a ranker cannot answer (ColdStartError) are counted as skipped.
EvalReport Evaluate(const Ranker& ranker, const Corpus& train, const Corpus& test);

struct ColdStartCohort {
  // Users of the raw corpus dropped by preprocessing, with trips remapped to
  // the filtered location indices. Trips touching a removed location are
  // dropped.
  std::vector<std::string> users;
  std::vector<std::vector<Trip>> trips_by_user;
};

ColdStartCohort SelectColdStartUsers(const Corpus& raw, const PreprocessResult& filtered);

// Every trip j >= 2 of every cold-start user becomes one query whose history
// is trips 1..j-1. Users are unknown to the ranker (user index -1).
EvalReport ColdStartEvaluate(const Ranker& ranker, const ColdStartCohort& cohort);

// Mean and sample std of acc1 (other fields averaged) over seeds.
EvalReport Aggregate(const std::vector<EvalReport>& runs);

// key=value lines, sorted keys, preceded by `config_hash` when non-empty.
std::string FormatReport(const EvalReport& report, const std::string& config_hash = "");
EvalReport ParseReport(const std::string& text);

// Everything a model needs from a raw corpus.
struct PreparedData {
  PreprocessResult filtered;
  SplitResult split;
  Vocab vocab;
  IntervalTables tables;
};

struct PrepareOptions {
  int min_trips = 10;
  int min_users = 10;
  double train_ratio = 0.7;
  int geohash_precision = 5;
  std::int64_t utc_offset_s = 0;
};

// Preprocess, split, vocabulary over the filtered corpus, interval tables
// from the train partition.
PreparedData Prepare(const Corpus& raw, const PrepareOptions& options = {});

// Factory for an ablation variant.
using ModelFactory =
    std::function<std::unique_ptr<StodPpaModel>(const Vocab&, const IntervalTables&)>;
ModelFactory BuildVariant(const std::string& kind, const ModelConfig& base);

enum class SweepAxis { kHidden, kEpochs };
SweepAxis ParseSweepAxis(const std::string& name);

struct SweepRow {
  int value = 0;
  EvalReport report;
};

// One train + evaluate run per value, all with the base config's seed.
std::vector<SweepRow> SensitivitySweep(SweepAxis axis, const std::vector<int>& values,
                                       const ModelConfig& base, const PreparedData& data);

// Tab-separated table with a header row.
std::string FormatSweep(SweepAxis axis, const std::vector<SweepRow>& rows);

}  // namespace stodppa

#endif  // STODPPA_EVAL_H_
