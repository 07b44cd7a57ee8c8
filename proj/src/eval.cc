#include "stodppa/eval.h"

#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stodppa/errors.h"
#include "stodppa/metrics.h"

namespace stodppa {
namespace {

EvalReport Finish(const std::string& method, const MetricAccumulator& acc, long skipped) {
  EvalReport r;
  r.method = method;
  r.acc1 = acc.acc1();
  r.acc5 = acc.acc5();
  r.acc10 = acc.acc10();
  r.map = acc.map();
  r.n_queries = acc.count();
  r.skipped = skipped;
  r.empty = acc.count() == 0;
  return r;
}

}  // namespace

EvalReport Evaluate(const Ranker& ranker, const Corpus& train, const Corpus& test) {
  if (train.num_users() != test.num_users()) {
    throw ContractError("train and test partitions disagree on users");
  }
  MetricAccumulator acc;
  long skipped = 0;
  for (int u = 0; u < test.num_users(); ++u) {
    const auto& tr = train.trips_by_user[u];
    const auto& te = test.trips_by_user[u];
    if (te.empty()) continue;
    std::vector<Trip> full(tr.begin(), tr.end());
    full.insert(full.end(), te.begin(), te.end());
    for (std::size_t j = 0; j < te.size(); ++j) {
      const std::size_t pos = tr.size() + j;
      if (pos == 0) {
        ++skipped;
        continue;
      }
      Query q;
      q.user = u;
      q.origin = te[j].origin;
      q.prev_dest = full[pos - 1].dest;
      q.pickup_ts = te[j].pickup_ts;
      q.history = std::span<const Trip>(full).first(pos);
      try {
        acc.Add(RankOf(ranker.Scores(q), te[j].dest));
      } catch (const ColdStartError&) {
        ++skipped;
      }
    }
  }
  return Finish(ranker.name(), acc, skipped);
}

ColdStartCohort SelectColdStartUsers(const Corpus& raw, const PreprocessResult& filtered) {
  std::unordered_map<std::string, int> loc_index;
  for (int l = 0; l < filtered.corpus.num_locations(); ++l) {
    loc_index.emplace(filtered.corpus.locations[l].id, l);
  }
  const std::set<std::string> removed(filtered.removed_users.begin(),
                                      filtered.removed_users.end());
  ColdStartCohort cohort;
  for (int u = 0; u < raw.num_users(); ++u) {
    if (!removed.contains(raw.users[u])) continue;
    std::vector<Trip> trips;
    for (const Trip& t : raw.trips_by_user[u]) {
      const auto o = loc_index.find(raw.locations[t.origin].id);
      const auto d = loc_index.find(raw.locations[t.dest].id);
      if (o == loc_index.end() || d == loc_index.end()) continue;
      trips.push_back({o->second, d->second, t.pickup_ts, t.dropoff_ts});
    }
    cohort.users.push_back(raw.users[u]);
    cohort.trips_by_user.push_back(std::move(trips));
  }
  return cohort;
}

EvalReport ColdStartEvaluate(const Ranker& ranker, const ColdStartCohort& cohort) {
  MetricAccumulator acc;
  long skipped = 0;
  for (const auto& trips : cohort.trips_by_user) {
    for (std::size_t j = 1; j < trips.size(); ++j) {
      Query q;
      q.user = -1;
      q.origin = trips[j].origin;
      q.prev_dest = trips[j - 1].dest;
      q.pickup_ts = trips[j].pickup_ts;
      q.history = std::span<const Trip>(trips).first(j);
      try {
        acc.Add(RankOf(ranker.Scores(q), trips[j].dest));
      } catch (const ColdStartError&) {
        ++skipped;
      }
    }
  }
  return Finish(ranker.name(), acc, skipped);
}

EvalReport Aggregate(const std::vector<EvalReport>& runs) {
  if (runs.empty()) throw ContractError("nothing to aggregate");
  EvalReport out;
  out.method = runs.front().method;
  out.seed = runs.front().seed;
  const double n = static_cast<double>(runs.size());
  for (const EvalReport& r : runs) {
    out.acc1 += r.acc1 / n;
    out.acc5 += r.acc5 / n;
    out.acc10 += r.acc10 / n;
    out.map += r.map / n;
    out.n_queries += r.n_queries;
    out.skipped += r.skipped;
  }
  double var = 0.0;
  for (const EvalReport& r : runs) var += (r.acc1 - out.acc1) * (r.acc1 - out.acc1);
  out.acc1_std = runs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  out.empty = out.n_queries == 0;
  return out;
}

std::string FormatReport(const EvalReport& r, const std::string& config_hash) {
  std::map<std::string, std::string> kv;
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  };
  kv["method"] = r.method;
  kv["acc@1"] = num(r.acc1);
  kv["acc@5"] = num(r.acc5);
  kv["acc@10"] = num(r.acc10);
  kv["map"] = num(r.map);
  kv["n_queries"] = std::to_string(r.n_queries);
  kv["skipped"] = std::to_string(r.skipped);
  kv["seed"] = std::to_string(r.seed);
  kv["empty"] = r.empty ? "true" : "false";
  if (r.acc1_std) kv["acc@1_std"] = num(*r.acc1_std);
  if (!config_hash.empty()) kv["config_hash"] = config_hash;
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  return os.str();
}

EvalReport ParseReport(const std::string& text) {
  EvalReport r;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("report line " + std::to_string(line_no) + ": missing '='");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "method") r.method = value;
      else if (key == "acc@1") r.acc1 = std::stod(value);
      else if (key == "acc@5") r.acc5 = std::stod(value);
      else if (key == "acc@10") r.acc10 = std::stod(value);
      else if (key == "map") r.map = std::stod(value);
      else if (key == "n_queries") r.n_queries = std::stol(value);
      else if (key == "skipped") r.skipped = std::stol(value);
      else if (key == "seed") r.seed = std::stoull(value);
      else if (key == "empty") r.empty = value == "true";
      else if (key == "acc@1_std") r.acc1_std = std::stod(value);
    } catch (const std::logic_error&) {
      throw ParseError("report line " + std::to_string(line_no) + ": bad value for " + key);
    }
  }
  return r;
}

PreparedData Prepare(const Corpus& raw, const PrepareOptions& options) {
  PreparedData data;
  data.filtered = Preprocess(raw, options.min_trips, options.min_users);
  data.split = ChronologicalSplit(data.filtered.corpus, options.train_ratio);
  data.vocab = BuildVocab(data.filtered.corpus, options.geohash_precision, options.utc_offset_s);
  data.tables = BuildIntervalTables(data.split.train);
  return data;
}

ModelFactory BuildVariant(const std::string& kind, const ModelConfig& base) {
  ModelConfig config = base;
  config.variant = ParseVariant(kind);
  return [config](const Vocab& vocab, const IntervalTables& tables) {
    return std::make_unique<StodPpaModel>(config, vocab, tables);
  };
}

SweepAxis ParseSweepAxis(const std::string& name) {
  if (name == "hidden" || name == "Hdim" || name == "hdim") return SweepAxis::kHidden;
  if (name == "epochs") return SweepAxis::kEpochs;
  throw ContractError("unknown sweep axis '" + name + "'");
}

std::vector<SweepRow> SensitivitySweep(SweepAxis axis, const std::vector<int>& values,
                                       const ModelConfig& base, const PreparedData& data) {
  std::vector<SweepRow> rows;
  for (int value : values) {
    ModelConfig config = base;
    if (axis == SweepAxis::kHidden) {
      config.hidden = value;
    } else {
      config.epochs = value;
    }
    StodPpaModel model(config, data.vocab, data.tables);
    model.Fit(data.split.train);
    EvalReport report = Evaluate(model, data.split.train, data.split.test);
    report.seed = config.seed;
    rows.push_back({value, report});
  }
  return rows;
}

std::string FormatSweep(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << (axis == SweepAxis::kHidden ? "hidden" : "epochs")
     << "\tacc@1\tacc@5\tacc@10\tmap\tn_queries\n";
  for (const SweepRow& row : rows) {
    os << row.value << '\t' << row.report.acc1 << '\t' << row.report.acc5 << '\t'
       << row.report.acc10 << '\t' << row.report.map << '\t' << row.report.n_queries << '\n';
  }
  return os.str();
}

}  // namespace stodppa
