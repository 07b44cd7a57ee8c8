#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "oracles.h"
#include "stodppa/optim.h"
#include "stodppa/stlstm.h"

namespace stodppa {
namespace {

constexpr int kDim = 4;
constexpr int kHid = 5;
constexpr int kLoc = 6;

struct Fixture {
  nn::ParamStore store;
  StLstmWeights w;
  nn::Rng rng{17};

  Fixture() { w = RegisterStLstm(store, "enc", kDim, kHid, kLoc, rng); }

  std::vector<double> Random(int n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
  }

  StLstmInput Input(nn::Tape& t) {
    return {t.Constant(Random(kDim)), t.Constant(Random(kDim)), t.Constant(Random(kDim)),
            t.Constant(Random(kLoc, 0.5)), t.Constant(Random(kLoc, 0.5))};
  }

  // Zeroes both auxiliary branches and makes the fusion pass c through.
  void MakeDegenerate() {
    for (const BranchWeights* b : {&w.spatial, &w.temporal}) {
      for (nn::ParamId id : {b->w_i, b->w_f, b->w_c, b->v_i, b->v_f, b->v_c, b->u_i, b->u_f,
                             b->u_c, b->b_i, b->b_f, b->b_c}) {
        store.value(id).Fill(0.0);
      }
    }
    nn::Tensor& fuse = store.value(w.w_h);
    fuse.Fill(0.0);
    for (int j = 0; j < kHid; ++j) fuse.at(j, j) = 1.0;
  }

  oracle::RawLstm Raw() const {
    oracle::RawLstm raw;
    raw.in = kDim;
    raw.hid = kHid;
    const LstmWeights& b = w.base;
    nn::ParamId ws[4] = {b.w_i, b.w_f, b.w_o, b.w_c};
    nn::ParamId us[4] = {b.u_i, b.u_f, b.u_o, b.u_c};
    nn::ParamId bs[4] = {b.b_i, b.b_f, b.b_o, b.b_c};
    for (int g = 0; g < 4; ++g) {
      auto copy = [&](nn::ParamId id) {
        auto v = store.value(id).values();
        return std::vector<double>(v.begin(), v.end());
      };
      raw.w[g] = copy(ws[g]);
      raw.u[g] = copy(us[g]);
      raw.b[g] = copy(bs[g]);
    }
    return raw;
  }
};

TEST_CASE("parameter shapes") {
  Fixture f;
  CHECK(f.store.value(f.w.base.w_i).shape() == std::vector<int>{kDim, kHid});
  CHECK(f.store.value(f.w.spatial.v_f).shape() == std::vector<int>{kLoc, kHid});
  CHECK(f.store.value(f.w.temporal.u_c).shape() == std::vector<int>{kHid, kHid});
  CHECK(f.store.value(f.w.w_h).shape() == std::vector<int>{3 * kHid, kHid});
  CHECK(f.store.Find("enc.Ws_i") >= 0);
  CHECK(f.store.Find("enc.Vt_c") >= 0);
}

TEST_CASE("all-zero weights give zero hidden states") {
  Fixture f;
  for (auto& p : f.store.params()) p.value.Fill(0.0);
  nn::Tape t(f.store);
  std::vector<StLstmInput> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(f.Input(t));
  for (nn::Var h : StLstmEncode(t, f.w, xs)) {
    for (double v : t.value(h)) CHECK(v == 0.0);
  }
}

TEST_CASE("degenerate configuration equals a plain LSTM") {
  Fixture f;
  f.MakeDegenerate();
  oracle::RawLstm raw = f.Raw();
  nn::Tape t(f.store);
  StLstmState state = ZeroStLstmState(t, kHid);
  std::vector<double> h(kHid, 0.0), c(kHid, 0.0);
  double worst = 0.0;
  for (int step = 0; step < 100; ++step) {
    StLstmInput x = f.Input(t);
    state = StLstmStep(t, f.w, state, x);
    auto xv = t.value(x.loc);
    raw.Step(std::vector<double>(xv.begin(), xv.end()), h, c);
    for (int j = 0; j < kHid; ++j) {
      worst = std::max(worst, std::abs(t.value(state.h)[j] - h[j]));
      worst = std::max(worst, std::abs(t.value(state.c)[j] - c[j]));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("plain LSTM step equals the raw oracle") {
  nn::ParamStore store;
  nn::Rng rng(2);
  LstmWeights w = RegisterLstm(store, "l", 3, 4, rng);
  oracle::RawLstm raw;
  raw.in = 3;
  raw.hid = 4;
  nn::ParamId ids[3][4] = {{w.w_i, w.w_f, w.w_o, w.w_c},
                           {w.u_i, w.u_f, w.u_o, w.u_c},
                           {w.b_i, w.b_f, w.b_o, w.b_c}};
  for (int g = 0; g < 4; ++g) {
    // Random biases so the oracle sees non-zero values everywhere.
    store.value(ids[2][g]) = nn::UniformTensor({4}, 0.5, rng);
    auto cp = [&](nn::ParamId id) {
      auto v = store.value(id).values();
      return std::vector<double>(v.begin(), v.end());
    };
    raw.w[g] = cp(ids[0][g]);
    raw.u[g] = cp(ids[1][g]);
    raw.b[g] = cp(ids[2][g]);
  }
  nn::Tape t(store);
  std::vector<nn::Var> xs;
  std::vector<double> h(4, 0.0), c(4, 0.0);
  std::vector<std::vector<double>> expect;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x = {std::sin(i), std::cos(i * 0.7), 0.1 * i - 1};
    xs.push_back(t.Constant(x));
    raw.Step(x, h, c);
    expect.push_back(h);
  }
  auto hs = LstmEncode(t, w, xs);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(t.value(hs[i])[j] == doctest::Approx(expect[i][j]).epsilon(1e-13));
  }
}

TEST_CASE("encoding is causal") {
  Fixture f;
  auto run = [&](std::uint64_t tail_seed) {
    f.rng.seed(99);
    nn::Tape t(f.store);
    std::vector<StLstmInput> xs;
    for (int i = 0; i < 4; ++i) xs.push_back(f.Input(t));
    f.rng.seed(tail_seed);
    for (int i = 0; i < 3; ++i) xs.push_back(f.Input(t));
    std::vector<std::vector<double>> out;
    for (nn::Var h : StLstmEncode(t, f.w, xs)) out.emplace_back(t.value(h).begin(), t.value(h).end());
    return out;
  };
  auto a = run(1), b = run(2);
  for (int i = 0; i < 4; ++i) CHECK(a[i] == b[i]);
  CHECK(a[4] != b[4]);
}

TEST_CASE("st-lstm gradients match finite differences") {
  Fixture f;
  for (auto& p : f.store.params()) {
    if (p.value.shape().size() == 1) p.value = nn::UniformTensor(p.value.shape(), 0.3, f.rng);
  }
  f.rng.seed(5);
  std::vector<std::vector<double>> inputs;
  for (int i = 0; i < 3 * 5; ++i) inputs.push_back(f.Random(i % 5 < 3 ? kDim : kLoc));
  auto loss = [&](bool backward) {
    nn::Tape t(f.store);
    std::vector<StLstmInput> xs;
    for (int i = 0; i < 3; ++i) {
      auto c = [&](int k) { return t.Constant(inputs[i * 5 + k]); };
      xs.push_back({c(0), c(1), c(2), c(3), c(4)});
    }
    std::vector<nn::Var> terms;
    int target = 0;
    for (nn::Var h : StLstmEncode(t, f.w, xs)) terms.push_back(t.SoftmaxCrossEntropy(h, target++));
    nn::Var l = t.SumScalars(terms);
    if (backward) t.Backward(l);
    return t.scalar(l);
  };
  nn::GradCheckResult r = nn::GradCheck(f.store, loss);
  CAPTURE(r.worst_param);
  CHECK(r.max_rel_error < 1e-4);
}

}  // namespace
}  // namespace stodppa
