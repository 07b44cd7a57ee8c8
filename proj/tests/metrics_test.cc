#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.h"
#include "stodppa/errors.h"
#include "stodppa/eval.h"
#include "stodppa/metrics.h"
#include "stodppa/ranker.h"

namespace stodppa {
namespace {

// Textbook average precision over a full ranking and a relevant set.
double BruteAveragePrecision(const std::vector<int>& ranking, const std::vector<int>& relevant) {
  double hits = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (std::find(relevant.begin(), relevant.end(), ranking[i]) != relevant.end()) {
      hits += 1.0;
      sum += hits / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

std::vector<int> FullRanking(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

TEST_CASE("ranking helpers agree with a full sort, ties by index") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> small(0, 4);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> scores(1 + round % 23);
    for (double& s : scores) s = small(rng);  // plenty of ties
    std::vector<int> full = FullRanking(scores);
    const int k = 1 + round % static_cast<int>(scores.size());
    auto top = RankTopK(scores, k);
    REQUIRE(static_cast<int>(top.size()) == k);
    for (int i = 0; i < k; ++i) CHECK(top[i].loc == full[i]);
    for (int truth = 0; truth < static_cast<int>(scores.size()); ++truth) {
      CHECK(RankOf(scores, truth) == oracle::BruteRank(scores, truth));
    }
  }
  std::vector<double> tie = {1, 1, 1};
  CHECK(RankOf(tie, 2) == 3);
  CHECK(RankTopK(tie, 10).size() == 3);
}

TEST_CASE("acc@k and map match brute force on random cases") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int round = 0; round < 100; ++round) {
    const int n = 10 + round % 15;
    std::vector<std::vector<int>> rankings;
    std::vector<int> truths, ranks;
    MetricAccumulator acc;
    long hits[3] = {0, 0, 0};
    const int n_queries = 1 + round % 9;
    for (int q = 0; q < n_queries; ++q) {
      std::vector<double> scores(n);
      for (double& s : scores) s = std::floor(u(rng) * 6);
      const int truth = static_cast<int>(u(rng) * n);
      std::vector<int> ranking = FullRanking(scores);
      const int rank = RankOf(scores, truth);
      ranks.push_back(rank);
      acc.Add(rank);
      int ks[3] = {1, 5, 10};
      for (int i = 0; i < 3; ++i) {
        const bool brute = std::find(ranking.begin(), ranking.begin() + ks[i], truth) !=
                           ranking.begin() + ks[i];
        CHECK(AccAtK(ranking, truth, ks[i], n) == (brute ? 1 : 0));
        hits[i] += brute;
      }
      CHECK(AveragePrecisionAtRank(rank) == BruteAveragePrecision(ranking, {truth}));
      rankings.push_back(ranking);
      truths.push_back(truth);
    }
    double brute_map = 0.0;
    for (int q = 0; q < n_queries; ++q) brute_map += BruteAveragePrecision(rankings[q], {truths[q]});
    brute_map /= n_queries;
    CHECK(MeanAveragePrecision(ranks) == doctest::Approx(brute_map).epsilon(1e-15));
    CHECK(acc.map() == doctest::Approx(brute_map).epsilon(1e-15));
    CHECK(acc.acc1() == static_cast<double>(hits[0]) / n_queries);
    CHECK(acc.acc5() == static_cast<double>(hits[1]) / n_queries);
    CHECK(acc.acc10() == static_cast<double>(hits[2]) / n_queries);
  }
}

TEST_CASE("single-query map is exactly 1 / rank") {
  for (int r = 1; r <= 500; ++r) {
    std::vector<int> one = {r};
    CHECK(MeanAveragePrecision(one) == 1.0 / r);
  }
  CHECK(MeanAveragePrecision({}) == 0.0);
  CHECK_THROWS_AS(AveragePrecisionAtRank(0), ContractError);
  std::vector<int> ranking = {0, 1, 2};
  CHECK_THROWS_AS(AccAtK(ranking, 3, 1, 3), ContractError);
  CHECK_THROWS_AS(AccAtK(ranking, 0, 0, 3), ContractError);
}

// Scores the previous destination highest, then the origin.
class EchoRanker : public Ranker {
 public:
  explicit EchoRanker(int n) : n_(n) {}
  std::string name() const override { return "echo"; }
  std::vector<double> Scores(const Query& q) const override {
    if (q.user == 2) throw ColdStartError("no");
    std::vector<double> s(n_, 0.0);
    s[q.origin] += 1.0;
    s[q.prev_dest] += 2.0;
    seen.push_back(q.history.size());
    return s;
  }
  mutable std::vector<std::size_t> seen;

 private:
  int n_;
};

TEST_CASE("evaluate uses the rolling previous destination and full history") {
  Corpus train, test;
  train.locations = test.locations = std::vector<LocationRecord>(5);
  train.users = test.users = {"a", "b", "c"};
  train.trips_by_user = {{{0, 1, 0, 1}, {1, 2, 2, 3}}, {}, {{0, 0, 0, 1}}};
  test.trips_by_user = {{{4, 2, 4, 5}, {3, 4, 6, 7}, {0, 0, 8, 9}}, {{1, 1, 0, 1}}, {{2, 3, 5, 6}}};
  EchoRanker echo(5);
  EvalReport r = Evaluate(echo, train, test);
  // a: prev=2 truth=2 -> rank 1; prev=2, origin 3, truth 4 -> rank 5 (2, 3, 0, 1, 4);
  //    prev=4 origin 0 truth 0 -> rank 2. b: no history, skipped. c: cold-start, skipped.
  CHECK(r.n_queries == 3);
  CHECK(r.skipped == 2);
  CHECK(r.acc1 == doctest::Approx(1.0 / 3));
  CHECK(r.acc5 == 1.0);
  CHECK(r.map == doctest::Approx((1.0 + 1.0 / 5 + 1.0 / 2) / 3));
  CHECK(echo.seen == std::vector<std::size_t>{2, 3, 4});
}

TEST_CASE("cold-start cohort selection and evaluation") {
  Corpus raw;
  raw.locations = {{"A", {}}, {"B", {}}, {"C", {}}};
  raw.users = {"kept", "cold"};
  raw.trips_by_user = {{{0, 2, 0, 1}}, {{2, 0, 0, 1}, {0, 1, 2, 3}, {2, 2, 4, 5}, {0, 2, 6, 7}}};
  PreprocessResult filtered;
  filtered.corpus.locations = {{"A", {}}, {"C", {}}};
  filtered.corpus.users = {"kept"};
  filtered.removed_users = {"cold"};
  ColdStartCohort cohort = SelectColdStartUsers(raw, filtered);
  REQUIRE(cohort.users == std::vector<std::string>{"cold"});
  // The trip to B is dropped; C becomes index 1.
  CHECK(cohort.trips_by_user[0] == std::vector<Trip>{{1, 0, 0, 1}, {1, 1, 4, 5}, {0, 1, 6, 7}});
  EchoRanker echo(2);
  EvalReport r = ColdStartEvaluate(echo, cohort);
  CHECK(r.n_queries == 2);
  CHECK(echo.seen == std::vector<std::size_t>{1, 2});
  CHECK(r.acc1 == 0.5);
}

TEST_CASE("aggregate and report round-trip") {
  EvalReport a{"m", 0.5, 0.6, 0.7, 0.55, 10, 1, 1, {}, false};
  EvalReport b{"m", 0.7, 0.8, 0.9, 0.75, 10, 0, 2, {}, false};
  EvalReport g = Aggregate({a, b});
  CHECK(g.acc1 == doctest::Approx(0.6));
  CHECK(*g.acc1_std == doctest::Approx(std::sqrt(0.02)));
  CHECK(g.n_queries == 20);
  std::string text = FormatReport(g, "00ff");
  CHECK(text.find("config_hash=00ff\n") != std::string::npos);
  CHECK(text.find("acc@1=") < text.find("acc@10="));
  EvalReport back = ParseReport(text);
  CHECK(back == g);
  CHECK_THROWS_AS(ParseReport("acc@1\n"), ParseError);
  CHECK_THROWS_AS(ParseReport("acc@1=x\n"), ParseError);
  CHECK_THROWS_AS(Aggregate({}), ContractError);
}

}  // namespace
}  // namespace stodppa
