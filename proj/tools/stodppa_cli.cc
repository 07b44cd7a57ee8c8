// stodppa: preprocess, train, eval, predict, ablate, synth, sweep.
//
// Exit codes: 0 success, 1 contract violation (bad flags, bad config,
// cold-start user without history), 2 I/O or parse error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stodppa/baselines.h"
#include "stodppa/checkpoint.h"
#include "stodppa/dataset.h"
#include "stodppa/errors.h"
#include "stodppa/eval.h"
#include "stodppa/model.h"
#include "stodppa/run_config.h"
#include "stodppa/synth.h"

namespace stodppa {
namespace {

namespace fs = std::filesystem;

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void MakeDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string StatsText(const CorpusStats& s) {
  std::ostringstream os;
  os << "users=" << s.users << "\nlocations=" << s.locations << "\norigins=" << s.origins
     << "\ndestinations=" << s.destinations << "\ntrips=" << s.trips << "\n";
  return os.str();
}

// ------------------------------------------------------------ preprocess

struct PreprocessArgs {
  std::string trips, locations, out;
  int min_trips = 10;
  int min_users = 10;
};

int CmdPreprocess(const PreprocessArgs& a) {
  const Corpus raw = LoadCorpus(a.trips, a.locations);
  const PreprocessResult r = Preprocess(raw, a.min_trips, a.min_users);
  MakeDir(a.out);
  SaveCorpus(r.corpus, (fs::path(a.out) / "trips.csv").string(),
             (fs::path(a.out) / "locations.csv").string());
  const std::string stats = StatsText(ComputeStats(r.corpus));
  WriteText((fs::path(a.out) / "stats.txt").string(), stats);
  std::cout << stats << "removed_users=" << r.removed_users.size() << "\n";
  if (r.empty_warning) std::cerr << "warning: filtering removed every user\n";
  return 0;
}

// ------------------------------------------------------------ train

struct TrainArgs {
  std::string config, out_checkpoint, loss_curve;
};

int CmdTrain(const TrainArgs& a) {
  const RunConfig rc = LoadRunConfig(a.config);
  rc.ValidatePaths();
  const Corpus raw = LoadCorpus(rc.trips_path, rc.locations_path);
  const PreparedData data = Prepare(raw, rc.prepare);
  if (data.filtered.empty_warning) throw ContractError("preprocessing left no users to train on");
  StodPpaModel model(rc.model, data.vocab, data.tables);
  std::cerr << "training " << VariantName(rc.model.variant) << " on "
            << data.filtered.corpus.num_users() << " users, "
            << data.vocab.n_locations << " locations\n";
  const TrainResult result = model.Fit(data.split.train, [](int epoch, double loss) {
    std::cerr << "epoch " << epoch + 1 << " loss " << loss << "\n";
  });
  SaveCheckpoint(a.out_checkpoint, model, data.filtered.corpus.locations,
                 data.filtered.corpus.users);
  SaveCorpus(data.split.train, a.out_checkpoint + ".train.csv", a.out_checkpoint + ".locations.csv");
  SaveCorpus(data.split.test, a.out_checkpoint + ".test.csv", a.out_checkpoint + ".locations.csv");

  std::ostringstream curve;
  curve << "epoch\tloss\n" << std::setprecision(17);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    curve << e + 1 << '\t' << result.epoch_loss[e] << '\n';
  }
  const std::string curve_path = a.loss_curve.empty() ? a.out_checkpoint + ".loss.tsv" : a.loss_curve;
  WriteText(curve_path, curve.str());
  std::cout << "checkpoint=" << a.out_checkpoint << "\nloss_curve=" << curve_path
            << "\nconfig_hash=" << ConfigHash(ToJson(rc)) << "\n";
  return 0;
}

// ------------------------------------------------------------ eval

// Users beyond the checkpoint's vocabulary are queried as unknown users.
class KnownUsersOnly : public Ranker {
 public:
  KnownUsersOnly(const StodPpaModel& model, int n_known) : model_(model), n_known_(n_known) {}
  std::string name() const override { return model_.name(); }
  std::vector<double> Scores(const Query& query) const override {
    Query q = query;
    if (q.user >= n_known_) q.user = -1;
    return model_.Scores(q);
  }

 private:
  const StodPpaModel& model_;
  int n_known_;
};

// Appends the users of `c` missing from `users`.
void ExtendUsers(const Corpus& c, std::vector<std::string>& users) {
  for (const auto& u : c.users) {
    if (std::find(users.begin(), users.end(), u) == users.end()) users.push_back(u);
  }
}

// Reorders `c` onto `users`, which must contain every user of `c`.
Corpus AlignUsers(const Corpus& c, const std::vector<std::string>& users) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < users.size(); ++i) index[users[i]] = static_cast<int>(i);
  Corpus out;
  out.locations = c.locations;
  out.users = users;
  out.trips_by_user.resize(users.size());
  for (int u = 0; u < c.num_users(); ++u) out.trips_by_user[index.at(c.users[u])] = c.trips_by_user[u];
  return out;
}

struct EvalArgs {
  std::string checkpoint, test, history, report;
};

int CmdEval(const EvalArgs& a) {
  const CheckpointData ckpt = LoadCheckpoint(a.checkpoint);
  const Corpus test_raw = LoadTrips(a.test, ckpt.locations);
  Corpus history_raw;
  history_raw.locations = ckpt.locations;
  if (!a.history.empty()) history_raw = LoadTrips(a.history, ckpt.locations);

  std::vector<std::string> users = ckpt.users;
  ExtendUsers(history_raw, users);
  ExtendUsers(test_raw, users);
  const Corpus history = AlignUsers(history_raw, users);
  const Corpus test = AlignUsers(test_raw, users);

  KnownUsersOnly ranker(*ckpt.model, static_cast<int>(ckpt.users.size()));
  EvalReport report = Evaluate(ranker, history, test);
  report.seed = ckpt.model->config().seed;
  const std::string text = FormatReport(report, ConfigHash(ModelConfigToJson(ckpt.model->config())));
  if (!a.report.empty()) WriteText(a.report, text);
  std::cout << text;
  if (report.empty) std::cerr << "warning: no query could be evaluated\n";
  return 0;
}

// ------------------------------------------------------------ predict

struct PredictArgs {
  std::string checkpoint, user, origin, prev_dest, history;
  std::int64_t pickup_ts = 0;
  int k = 10;
  bool explain = false;
};

int CmdPredict(const PredictArgs& a) {
  const CheckpointData ckpt = LoadCheckpoint(a.checkpoint);
  auto loc_index = [&](const std::string& id) {
    for (std::size_t i = 0; i < ckpt.locations.size(); ++i) {
      if (ckpt.locations[i].id == id) return static_cast<int>(i);
    }
    throw ContractError("unknown location '" + id + "'");
  };
  Query q;
  q.origin = loc_index(a.origin);
  q.prev_dest = loc_index(a.prev_dest);
  q.pickup_ts = a.pickup_ts;
  for (std::size_t i = 0; i < ckpt.users.size(); ++i) {
    if (ckpt.users[i] == a.user) q.user = static_cast<int>(i);
  }
  std::vector<Trip> history;
  if (!a.history.empty()) {
    const Corpus h = LoadTrips(a.history, ckpt.locations);
    for (int u = 0; u < h.num_users(); ++u) {
      if (h.users[u] == a.user) history = h.trips_by_user[u];
    }
  }
  q.history = history;
  const bool cached = q.user >= 0 && ckpt.model->cache().contains(q.user);
  if (!cached && history.empty()) {
    throw ColdStartError("user '" + a.user +
                         "' has no cached encoding in this checkpoint; pass --history with a "
                         "trips CSV holding the user's earlier trips (at least one) to get a "
                         "cold-start recommendation");
  }
  if (q.pickup_ts == 0 && !history.empty()) q.pickup_ts = history.back().dropoff_ts;

  const Prediction p = ckpt.model->Predict(q);
  const auto top = RankTopK(p.probs, a.k);
  std::printf("rank\tloc_id\tprob\n");
  for (std::size_t i = 0; i < top.size(); ++i) {
    std::printf("%zu\t%s\t%.6f\n", i + 1, ckpt.locations[top[i].loc].id.c_str(), top[i].score);
  }
  if (a.explain) {
    if (p.attention.empty()) {
      std::printf("# variant %s has no attention to explain\n", ckpt.model->name().c_str());
      return 0;
    }
    const std::size_t n = p.attention.size() / 2;
    std::printf("state\tloc_id\tattention_pct\n");
    for (std::size_t i = 0; i < p.attention.size(); ++i) {
      double mean = 0.0;
      for (double w : p.attention[i]) mean += w;
      mean /= static_cast<double>(p.attention[i].size());
      const std::string label = (i < n ? "O" : "D") + std::to_string((i < n ? i : i - n) + 1);
      const std::string loc =
          i < p.state_locs.size() ? ckpt.locations[p.state_locs[i]].id : std::string("?");
      std::printf("%s\t%s\t%.2f\n", label.c_str(), loc.c_str(), 100.0 * mean);
    }
  }
  return 0;
}

// ------------------------------------------------------------ ablate

struct AblateArgs {
  std::string config;
  std::vector<std::string> variants;
  std::vector<std::uint64_t> seeds;
};

int CmdAblate(const AblateArgs& a) {
  const RunConfig rc = LoadRunConfig(a.config);
  rc.ValidatePaths();
  const Corpus raw = LoadCorpus(rc.trips_path, rc.locations_path);
  const PreparedData data = Prepare(raw, rc.prepare);
  const Corpus& train = data.split.train;
  const Corpus& test = data.split.test;
  const std::vector<std::uint64_t> seeds =
      a.seeds.empty() ? std::vector<std::uint64_t>{rc.model.seed} : a.seeds;
  const FrequencyModel freq(train);

  for (const std::string& kind : a.variants) {
    std::vector<EvalReport> runs;
    for (std::uint64_t seed : seeds) {
      EvalReport r;
      if (kind == "top") {
        r = Evaluate(TopRanker(freq), train, test);
      } else if (kind == "u-top") {
        r = Evaluate(UserTopRanker(freq), train, test);
      } else if (kind == "taxi") {
        r = Evaluate(TaxiRanker(freq), train, test);
      } else if (kind == "od-lstm") {
        OdLstmConfig oc;
        oc.dim = rc.model.dim;
        oc.hidden = rc.model.hidden;
        oc.lr = rc.model.lr;
        oc.epochs = rc.model.epochs;
        oc.seed = seed;
        OdLstmBaseline model(oc, data.vocab.n_locations);
        model.Fit(train);
        r = Evaluate(model, train, test);
      } else {
        ModelConfig mc = rc.model;
        mc.seed = seed;
        auto model = BuildVariant(kind, mc)(data.vocab, data.tables);
        model->Fit(train);
        r = Evaluate(*model, train, test);
      }
      r.seed = seed;
      std::cerr << kind << " seed " << seed << " acc@1 " << r.acc1 << "\n";
      runs.push_back(r);
    }
    nlohmann::json j = ToJson(rc);
    j["variant"] = kind;
    std::cout << FormatReport(seeds.size() > 1 ? Aggregate(runs) : runs.front(), ConfigHash(j))
              << "\n";
  }
  return 0;
}

// ------------------------------------------------------------ synth

struct SynthArgs {
  std::string config, out;
  std::int64_t seed = -1;
};

int CmdSynth(const SynthArgs& a) {
  synth::SynthConfig c = a.config.empty() ? synth::SynthConfig{} : LoadSynthConfig(a.config);
  if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
  const synth::SynthOutput out = synth::Generate(c);
  MakeDir(a.out);
  SaveCorpus(out.corpus, (fs::path(a.out) / "trips.csv").string(),
             (fs::path(a.out) / "locations.csv").string());
  WriteText((fs::path(a.out) / "rule.json").string(), synth::RuleManifest(c, out.rule));
  std::cout << StatsText(ComputeStats(out.corpus))
            << "oracle_accuracy=" << synth::OracleAccuracy(c) << "\n";
  return 0;
}

// ------------------------------------------------------------ sweep

struct SweepArgs {
  std::string config, axis;
  std::vector<int> values;
};

int CmdSweep(const SweepArgs& a) {
  const RunConfig rc = LoadRunConfig(a.config);
  rc.ValidatePaths();
  const PreparedData data = Prepare(LoadCorpus(rc.trips_path, rc.locations_path), rc.prepare);
  const SweepAxis axis = ParseSweepAxis(a.axis);
  std::cout << FormatSweep(axis, SensitivitySweep(axis, a.values, rc.model, data));
  return 0;
}

int Run(int argc, char** argv) {
  CLI::App app{"Origin-aware next-destination recommender"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Filter a corpus and write it with its statistics");
  p->add_option("--trips", pre.trips, "Trips CSV")->required();
  p->add_option("--locations", pre.locations, "Locations CSV")->required();
  p->add_option("--out", pre.out, "Output directory")->required();
  p->add_option("--min-trips", pre.min_trips, "Minimum trips per user")->capture_default_str();
  p->add_option("--min-users", pre.min_users, "Minimum distinct users per location")
      ->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model from a run config");
  t->add_option("--config", tr.config, "Run config (JSON)")->required();
  t->add_option("--out-checkpoint", tr.out_checkpoint, "Checkpoint path")->required();
  t->add_option("--loss-curve", tr.loss_curve, "Loss curve TSV (default <checkpoint>.loss.tsv)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on test trips");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint path")->required();
  e->add_option("--test", ev.test, "Test trips CSV")->required();
  e->add_option("--history", ev.history, "Earlier trips CSV (e.g. <checkpoint>.train.csv)");
  e->add_option("--report", ev.report, "Report output path");

  PredictArgs pr;
  auto* q = app.add_subcommand("predict", "Rank next destinations for one query");
  q->add_option("--checkpoint", pr.checkpoint, "Checkpoint path")->required();
  q->add_option("--user", pr.user, "User id")->required();
  q->add_option("--origin", pr.origin, "Current origin location id")->required();
  q->add_option("--prev-dest", pr.prev_dest, "Previous destination location id")->required();
  q->add_option("--k", pr.k, "List length")->capture_default_str()->check(CLI::PositiveNumber);
  q->add_option("--history", pr.history, "Trips CSV with the user's earlier trips");
  q->add_option("--pickup-ts", pr.pickup_ts, "Pickup time of the current trip (epoch seconds)");
  q->add_flag("--explain", pr.explain, "Print per-state attention percentages");

  AblateArgs ab;
  auto* b = app.add_subcommand("ablate", "Train and evaluate variants or baselines");
  b->add_option("--config", ab.config, "Run config (JSON)")->required();
  b->add_option("--variant", ab.variants,
                "stod-ppa, od-ppa, encoder-only, decoder-only, user-add, user-concat, od-lstm, "
                "top, u-top, taxi")
      ->required();
  b->add_option("--seeds", ab.seeds, "Seeds to average over")->delimiter(',');

  SynthArgs sy;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus with a planted rule");
  s->add_option("--config", sy.config, "Synthetic generator config (JSON)");
  s->add_option("--out", sy.out, "Output directory")->required();
  s->add_option("--seed", sy.seed, "Override the config seed");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Sensitivity sweep over one hyperparameter");
  w->add_option("--config", sw.config, "Run config (JSON)")->required();
  w->add_option("--axis", sw.axis, "hidden or epochs")->required();
  w->add_option("--values", sw.values, "Comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 1;
  }

  try {
    if (*p) return CmdPreprocess(pre);
    if (*t) return CmdTrain(tr);
    if (*e) return CmdEval(ev);
    if (*q) return CmdPredict(pr);
    if (*b) return CmdAblate(ab);
    if (*s) return CmdSynth(sy);
    if (*w) return CmdSweep(sw);
  } catch (const ColdStartError& ex) {
    std::cerr << "cold start: " << ex.what() << "\n";
    return 1;
  } catch (const ContractError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const IoError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace
}  // namespace stodppa

int main(int argc, char** argv) { return stodppa::Run(argc, argv); }
