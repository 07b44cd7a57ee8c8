#include "stodppa/stlstm.h"

namespace stodppa {
namespace {

using nn::ParamId;
using nn::Tape;
using nn::Var;

ParamId Matrix(nn::ParamStore& store, const std::string& name, int rows, int cols,
               nn::Rng& rng) {
  return store.Add(name, nn::GlorotUniform(rows, cols, rng));
}

ParamId Bias(nn::ParamStore& store, const std::string& name, int size) {
  return store.Add(name, nn::Tensor({size}));
}

BranchWeights RegisterBranch(nn::ParamStore& store, const std::string& prefix,
                             const std::string& tag, int dim, int hidden, int n_loc,
                             nn::Rng& rng) {
  BranchWeights b;
  b.w_i = Matrix(store, prefix + ".W" + tag + "_i", dim, hidden, rng);
  b.w_f = Matrix(store, prefix + ".W" + tag + "_f", dim, hidden, rng);
  b.w_c = Matrix(store, prefix + ".W" + tag + "_c", dim, hidden, rng);
  b.v_i = Matrix(store, prefix + ".V" + tag + "_i", n_loc, hidden, rng);
  b.v_f = Matrix(store, prefix + ".V" + tag + "_f", n_loc, hidden, rng);
  b.v_c = Matrix(store, prefix + ".V" + tag + "_c", n_loc, hidden, rng);
  b.u_i = Matrix(store, prefix + ".U" + tag + "_i", hidden, hidden, rng);
  b.u_f = Matrix(store, prefix + ".U" + tag + "_f", hidden, hidden, rng);
  b.u_c = Matrix(store, prefix + ".U" + tag + "_c", hidden, hidden, rng);
  b.b_i = Bias(store, prefix + ".b" + tag + "_i", hidden);
  b.b_f = Bias(store, prefix + ".b" + tag + "_f", hidden);
  b.b_c = Bias(store, prefix + ".b" + tag + "_c", hidden);
  return b;
}

// act(x W + r V + h U + b)
Var Affine(Tape& tape, ParamId w, Var x, ParamId v, Var r, ParamId u, Var h, ParamId b) {
  return tape.AddBias(tape.Add({tape.MatVec(w, x), tape.MatVec(v, r), tape.MatVec(u, h)}), b);
}

// Cell-state update shared by the spatial and temporal branches.
Var BranchCell(Tape& tape, const BranchWeights& w, Var local, Var global, Var h_prev,
               Var c_prev) {
  Var i = tape.Sigmoid(Affine(tape, w.w_i, local, w.v_i, global, w.u_i, h_prev, w.b_i));
  Var f = tape.Sigmoid(Affine(tape, w.w_f, local, w.v_f, global, w.u_f, h_prev, w.b_f));
  Var c_in = tape.Tanh(Affine(tape, w.w_c, local, w.v_c, global, w.u_c, h_prev, w.b_c));
  return tape.Add({tape.Mul(f, c_prev), tape.Mul(i, c_in)});
}

struct BaseGates {
  Var o;
  Var c;
};

BaseGates BaseCell(Tape& tape, const LstmWeights& w, Var x, Var h_prev, Var c_prev) {
  auto gate = [&](ParamId wx, ParamId uh, ParamId b) {
    return tape.AddBias(tape.Add({tape.MatVec(wx, x), tape.MatVec(uh, h_prev)}), b);
  };
  Var i = tape.Sigmoid(gate(w.w_i, w.u_i, w.b_i));
  Var f = tape.Sigmoid(gate(w.w_f, w.u_f, w.b_f));
  Var o = tape.Sigmoid(gate(w.w_o, w.u_o, w.b_o));
  Var c_in = tape.Tanh(gate(w.w_c, w.u_c, w.b_c));
  Var c = tape.Add({tape.Mul(f, c_prev), tape.Mul(i, c_in)});
  return {o, c};
}

}  // namespace

LstmWeights RegisterLstm(nn::ParamStore& store, const std::string& prefix, int input_size,
                         int hidden_size, nn::Rng& rng) {
  if (input_size <= 0 || hidden_size <= 0) throw ContractError("LSTM sizes must be positive");
  LstmWeights w;
  w.input_size = input_size;
  w.hidden_size = hidden_size;
  w.w_i = Matrix(store, prefix + ".W_i", input_size, hidden_size, rng);
  w.w_f = Matrix(store, prefix + ".W_f", input_size, hidden_size, rng);
  w.w_o = Matrix(store, prefix + ".W_o", input_size, hidden_size, rng);
  w.w_c = Matrix(store, prefix + ".W_c", input_size, hidden_size, rng);
  w.u_i = Matrix(store, prefix + ".U_i", hidden_size, hidden_size, rng);
  w.u_f = Matrix(store, prefix + ".U_f", hidden_size, hidden_size, rng);
  w.u_o = Matrix(store, prefix + ".U_o", hidden_size, hidden_size, rng);
  w.u_c = Matrix(store, prefix + ".U_c", hidden_size, hidden_size, rng);
  w.b_i = Bias(store, prefix + ".b_i", hidden_size);
  w.b_f = Bias(store, prefix + ".b_f", hidden_size);
  w.b_o = Bias(store, prefix + ".b_o", hidden_size);
  w.b_c = Bias(store, prefix + ".b_c", hidden_size);
  return w;
}

StLstmWeights RegisterStLstm(nn::ParamStore& store, const std::string& prefix, int dim,
                             int hidden_size, int n_locations, nn::Rng& rng) {
  if (n_locations <= 0) throw ContractError("ST-LSTM needs at least one location");
  StLstmWeights w;
  w.n_locations = n_locations;
  w.base = RegisterLstm(store, prefix, dim, hidden_size, rng);
  w.spatial = RegisterBranch(store, prefix, "s", dim, hidden_size, n_locations, rng);
  w.temporal = RegisterBranch(store, prefix, "t", dim, hidden_size, n_locations, rng);
  w.w_h = Matrix(store, prefix + ".W_h", 3 * hidden_size, hidden_size, rng);
  return w;
}

LstmState ZeroLstmState(Tape& tape, int hidden_size) {
  Var z = tape.Zeros(hidden_size);
  return {z, z};
}

StLstmState ZeroStLstmState(Tape& tape, int hidden_size) {
  Var z = tape.Zeros(hidden_size);
  return {z, z, z, z};
}

LstmState LstmStep(Tape& tape, const LstmWeights& w, const LstmState& prev, Var x) {
  const BaseGates g = BaseCell(tape, w, x, prev.h, prev.c);
  return {tape.Mul(g.o, tape.Tanh(g.c)), g.c};
}

StLstmState StLstmStep(Tape& tape, const StLstmWeights& w, const StLstmState& prev,
                       const StLstmInput& x) {
  const BaseGates g = BaseCell(tape, w.base, x.loc, prev.h, prev.c);
  Var c_s = BranchCell(tape, w.spatial, x.geo, x.spatial_row, prev.h, prev.c_s);
  Var c_t = BranchCell(tape, w.temporal, x.slot, x.temporal_row, prev.h, prev.c_t);
  Var fused = tape.MatVec(w.w_h, tape.Concat({g.c, c_s, c_t}));
  return {tape.Mul(g.o, tape.Tanh(fused)), g.c, c_s, c_t};
}

std::vector<Var> LstmEncode(Tape& tape, const LstmWeights& w, std::span<const Var> inputs) {
  std::vector<Var> out;
  if (inputs.empty()) return out;
  LstmState state = ZeroLstmState(tape, w.hidden_size);
  for (Var x : inputs) {
    state = LstmStep(tape, w, state, x);
    out.push_back(state.h);
  }
  return out;
}

std::vector<Var> StLstmEncode(Tape& tape, const StLstmWeights& w,
                              std::span<const StLstmInput> inputs) {
  std::vector<Var> out;
  if (inputs.empty()) return out;
  StLstmState state = ZeroStLstmState(tape, w.base.hidden_size);
  for (const StLstmInput& x : inputs) {
    state = StLstmStep(tape, w, state, x);
    out.push_back(state.h);
  }
  return out;
}

}  // namespace stodppa
