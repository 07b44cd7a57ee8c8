#ifndef STODPPA_TAPE_H_
#define STODPPA_TAPE_H_

#include <initializer_list>
#include <span>
#include <vector>

#include "stodppa/tensor.h"

namespace stodppa::nn {

// Handle to a vector-valued node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode automatic differentiation over dense vectors.
//
// Forward values are computed eagerly as nodes are recorded. Backward()
// propagates from a scalar node and accumulates parameter gradients into the
// ParamStore the tape was built with. A tape is single-use.
class Tape {
 public:
  explicit Tape(ParamStore& params) : params_(&params), mutable_params_(&params) {}
  // Forward-only tape; Backward() throws.
  explicit Tape(const ParamStore& params) : params_(&params) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf without gradient.
  Var Constant(std::span<const double> values);
  Var Zeros(int size);

  // Row `index` of a parameter matrix (embedding lookup).
  Var Row(ParamId table, int index);
  // y[j] = sum_k x[k] * W[row_offset + k][j].
  Var MatVec(ParamId weight, Var x, int row_offset = 0);
  // x + b for a bias vector parameter.
  Var AddBias(Var x, ParamId bias);
  Var Add(std::initializer_list<Var> terms);
  Var Mul(Var a, Var b);
  Var Sigmoid(Var x);
  Var Tanh(Var x);
  Var LeakyRelu(Var x, double slope);
  Var Concat(std::initializer_list<Var> parts);
  Var Softmax(Var x);

  // Per-dimension attention pooling. For every state i and dimension k:
  //   s[i][k] = leaky_relu(query[k] + keys[i][k])
  //   alpha[i][k] = exp(s[i][k]) / sum_p exp(s[p][k])
  //   y[k] = sum_i alpha[i][k] * values[i][k]
  // `query` and every key share the values' width.
  Var AttendPerDim(Var query, std::span<const Var> keys, std::span<const Var> values,
                   double slope);

  // -log(softmax(logits)[target] + 1e-12). Scalar node.
  Var SoftmaxCrossEntropy(Var logits, int target);
  // scale * sum of scalar nodes.
  Var SumScalars(std::span<const Var> terms, double scale = 1.0);

  std::span<const double> value(Var v) const;
  std::span<const double> grad(Var v) const;
  int size_of(Var v) const { return nodes_.at(v.id).size; }
  double scalar(Var v) const { return value(v)[0]; }

  // Attention weights recorded by an AttendPerDim node, states x width.
  std::vector<std::vector<double>> AttentionWeights(Var attended) const;
  // Softmax probabilities recorded by a SoftmaxCrossEntropy node.
  std::span<const double> Probabilities(Var loss) const;

  // Seeds d(root)/d(root) = 1 and accumulates all gradients.
  void Backward(Var root);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  enum class Op {
    kConstant,
    kRow,
    kMatVec,
    kAddBias,
    kAdd,
    kMul,
    kSigmoid,
    kTanh,
    kLeakyRelu,
    kConcat,
    kSoftmax,
    kAttend,
    kSoftmaxXent,
    kSumScalars,
  };

  struct Node {
    Op op;
    int offset = 0;  // into values_/grads_
    int size = 0;
    int a = -1;
    int b = -1;
    int param = -1;
    int aux = 0;         // row index, row offset, or target
    int args_begin = 0;  // into args_
    int args_count = 0;
    int extra = 0;  // into extra_
    double scalar = 0.0;
    bool needs_grad = false;
  };

  Var Push(Node node);
  double* val(int id) { return values_.data() + nodes_[id].offset; }
  const double* val(int id) const { return values_.data() + nodes_[id].offset; }
  double* grd(int id) { return grads_.data() + nodes_[id].offset; }
  const Node& node(Var v) const;
  void Require(bool ok, const char* what) const;

  const ParamStore* params_;
  ParamStore* mutable_params_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<int> args_;
  std::vector<double> extra_;
};

}  // namespace stodppa::nn

#endif  // STODPPA_TAPE_H_
