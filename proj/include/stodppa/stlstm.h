#ifndef STODPPA_STLSTM_H_
#define STODPPA_STLSTM_H_

#include <span>
#include <string>
#include <vector>

#include "stodppa/optim.h"
#include "stodppa/tape.h"

namespace stodppa {

// Input, forget, output gates and cell input of a plain LSTM:
//   i = sigmoid(x W_i + h U_i + b_i), likewise f, o
//   c~ = tanh(x W_c + h U_c + b_c)
//   c' = f * c + i * c~,  h' = o * tanh(c')
struct LstmWeights {
  nn::ParamId w_i, w_f, w_o, w_c;  // in x hidden
  nn::ParamId u_i, u_f, u_o, u_c;  // hidden x hidden
  nn::ParamId b_i, b_f, b_o, b_c;  // hidden
  int input_size = 0;
  int hidden_size = 0;
};

// Gates of one auxiliary cell state (spatial or temporal). The local-view
// embedding enters through W, the global-view interval row through V.
struct BranchWeights {
  nn::ParamId w_i, w_f, w_c;  // dim x hidden
  nn::ParamId v_i, v_f, v_c;  // n_locations x hidden
  nn::ParamId u_i, u_f, u_c;  // hidden x hidden
  nn::ParamId b_i, b_f, b_c;  // hidden
};

struct StLstmWeights {
  LstmWeights base;
  BranchWeights spatial;
  BranchWeights temporal;
  nn::ParamId w_h;  // (3 * hidden) x hidden, fuses c || c_s || c_t
  int n_locations = 0;
};

LstmWeights RegisterLstm(nn::ParamStore& store, const std::string& prefix, int input_size,
                         int hidden_size, nn::Rng& rng);
StLstmWeights RegisterStLstm(nn::ParamStore& store, const std::string& prefix, int dim,
                             int hidden_size, int n_locations, nn::Rng& rng);

struct LstmState {
  nn::Var h, c;
};

struct StLstmState {
  nn::Var h, c, c_s, c_t;
};

// One visit as seen by the ST-LSTM: location, geohash-cell and timeslot
// embeddings plus the location's spatial and temporal interval rows.
struct StLstmInput {
  nn::Var loc;
  nn::Var geo;
  nn::Var slot;
  nn::Var spatial_row;
  nn::Var temporal_row;
};

LstmState ZeroLstmState(nn::Tape& tape, int hidden_size);
StLstmState ZeroStLstmState(nn::Tape& tape, int hidden_size);

LstmState LstmStep(nn::Tape& tape, const LstmWeights& w, const LstmState& prev, nn::Var x);

// The base LSTM gates run on the location embedding. The spatial cell state
// is driven by (geo, spatial_row, prev.h), the temporal one by
// (slot, temporal_row, prev.h). The three cell states are fused and gated by
// the base output gate: h = o * tanh((c || c_s || c_t) W_h).
StLstmState StLstmStep(nn::Tape& tape, const StLstmWeights& w, const StLstmState& prev,
                       const StLstmInput& x);

// Runs from a zero state and returns one hidden state per input.
std::vector<nn::Var> LstmEncode(nn::Tape& tape, const LstmWeights& w,
                                std::span<const nn::Var> inputs);
std::vector<nn::Var> StLstmEncode(nn::Tape& tape, const StLstmWeights& w,
                                  std::span<const StLstmInput> inputs);

}  // namespace stodppa

#endif  // STODPPA_STLSTM_H_
