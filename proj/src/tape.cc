#include "stodppa/tape.h"

#include <algorithm>
#include <cmath>

namespace stodppa::nn {
namespace {

constexpr double kProbClip = 1e-12;

double SigmoidScalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void Tape::Require(bool ok, const char* what) const {
  if (!ok) throw ContractError(what);
}

const Tape::Node& Tape::node(Var v) const {
  Require(v.id >= 0 && v.id < static_cast<int>(nodes_.size()), "invalid tape variable");
  return nodes_[v.id];
}

Var Tape::Push(Node n) {
  n.offset = static_cast<int>(values_.size());
  values_.resize(values_.size() + n.size, 0.0);
  grads_.resize(grads_.size() + n.size, 0.0);
  nodes_.push_back(n);
  return Var{static_cast<int>(nodes_.size() - 1)};
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = node(v);
  return {values_.data() + n.offset, static_cast<std::size_t>(n.size)};
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = node(v);
  return {grads_.data() + n.offset, static_cast<std::size_t>(n.size)};
}

Var Tape::Constant(std::span<const double> values) {
  Node n{Op::kConstant};
  n.size = static_cast<int>(values.size());
  Var v = Push(n);
  std::copy(values.begin(), values.end(), val(v.id));
  return v;
}

Var Tape::Zeros(int size) {
  Node n{Op::kConstant};
  n.size = size;
  return Push(n);
}

Var Tape::Row(ParamId table, int index) {
  const Tensor& t = params_->value(table);
  Require(t.shape().size() == 2, "embedding table must be 2-D");
  Require(index >= 0 && index < t.rows(), "embedding index out of range");
  Node n{Op::kRow};
  n.size = t.cols();
  n.param = table;
  n.aux = index;
  n.needs_grad = true;
  Var v = Push(n);
  const auto row = t.row(index);
  std::copy(row.begin(), row.end(), val(v.id));
  return v;
}

Var Tape::MatVec(ParamId weight, Var x, int row_offset) {
  const Tensor& w = params_->value(weight);
  const Node& xn = node(x);
  Require(w.shape().size() == 2, "matvec weight must be 2-D");
  Require(row_offset >= 0 && row_offset + xn.size <= w.rows(), "matvec shape mismatch");
  Node n{Op::kMatVec};
  n.size = w.cols();
  n.a = x.id;
  n.param = weight;
  n.aux = row_offset;
  n.needs_grad = true;
  const int in = xn.size;
  Var v = Push(n);
  double* y = val(v.id);
  const double* xv = val(x.id);
  const int cols = w.cols();
  for (int k = 0; k < in; ++k) {
    const double xk = xv[k];
    if (xk == 0.0) continue;
    const double* wr = w.data() + static_cast<std::size_t>(row_offset + k) * cols;
    for (int j = 0; j < cols; ++j) y[j] += xk * wr[j];
  }
  return v;
}

Var Tape::AddBias(Var x, ParamId bias) {
  const Tensor& b = params_->value(bias);
  const Node& xn = node(x);
  Require(static_cast<int>(b.size()) == xn.size, "bias shape mismatch");
  Node n{Op::kAddBias};
  n.size = xn.size;
  n.a = x.id;
  n.param = bias;
  n.needs_grad = true;
  Var v = Push(n);
  double* y = val(v.id);
  const double* xv = val(x.id);
  for (int j = 0; j < n.size; ++j) y[j] = xv[j] + b[j];
  return v;
}

Var Tape::Add(std::initializer_list<Var> terms) {
  Require(terms.size() > 0, "add of nothing");
  Node n{Op::kAdd};
  n.size = node(*terms.begin()).size;
  n.args_begin = static_cast<int>(args_.size());
  n.args_count = static_cast<int>(terms.size());
  for (Var t : terms) {
    const Node& tn = node(t);
    Require(tn.size == n.size, "add shape mismatch");
    n.needs_grad = n.needs_grad || tn.needs_grad;
    args_.push_back(t.id);
  }
  Var v = Push(n);
  double* y = val(v.id);
  for (Var t : terms) {
    const double* tv = val(t.id);
    for (int j = 0; j < n.size; ++j) y[j] += tv[j];
  }
  return v;
}

Var Tape::Mul(Var a, Var b) {
  const Node& an = node(a);
  const Node& bn = node(b);
  Require(an.size == bn.size, "mul shape mismatch");
  Node n{Op::kMul};
  n.size = an.size;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = an.needs_grad || bn.needs_grad;
  Var v = Push(n);
  double* y = val(v.id);
  const double* av = val(a.id);
  const double* bv = val(b.id);
  for (int j = 0; j < n.size; ++j) y[j] = av[j] * bv[j];
  return v;
}

Var Tape::Sigmoid(Var x) {
  const Node& xn = node(x);
  Node n{Op::kSigmoid};
  n.size = xn.size;
  n.a = x.id;
  n.needs_grad = xn.needs_grad;
  Var v = Push(n);
  double* y = val(v.id);
  const double* xv = val(x.id);
  for (int j = 0; j < n.size; ++j) y[j] = SigmoidScalar(xv[j]);
  return v;
}

Var Tape::Tanh(Var x) {
  const Node& xn = node(x);
  Node n{Op::kTanh};
  n.size = xn.size;
  n.a = x.id;
  n.needs_grad = xn.needs_grad;
  Var v = Push(n);
  double* y = val(v.id);
  const double* xv = val(x.id);
  for (int j = 0; j < n.size; ++j) y[j] = std::tanh(xv[j]);
  return v;
}

Var Tape::LeakyRelu(Var x, double slope) {
  const Node& xn = node(x);
  Node n{Op::kLeakyRelu};
  n.size = xn.size;
  n.a = x.id;
  n.scalar = slope;
  n.needs_grad = xn.needs_grad;
  Var v = Push(n);
  double* y = val(v.id);
  const double* xv = val(x.id);
  for (int j = 0; j < n.size; ++j) y[j] = xv[j] >= 0.0 ? xv[j] : slope * xv[j];
  return v;
}

Var Tape::Concat(std::initializer_list<Var> parts) {
  Node n{Op::kConcat};
  n.args_begin = static_cast<int>(args_.size());
  n.args_count = static_cast<int>(parts.size());
  for (Var p : parts) {
    const Node& pn = node(p);
    n.size += pn.size;
    n.needs_grad = n.needs_grad || pn.needs_grad;
    args_.push_back(p.id);
  }
  Var v = Push(n);
  double* y = val(v.id);
  for (Var p : parts) {
    const double* pv = val(p.id);
    const int s = nodes_[p.id].size;
    std::copy(pv, pv + s, y);
    y += s;
  }
  return v;
}

Var Tape::Softmax(Var x) {
  const Node& xn = node(x);
  Require(xn.size > 0, "softmax of empty vector");
  Node n{Op::kSoftmax};
  n.size = xn.size;
  n.a = x.id;
  n.needs_grad = xn.needs_grad;
  Var v = Push(n);
  double* y = val(v.id);
  const double* xv = val(x.id);
  const double mx = *std::max_element(xv, xv + n.size);
  double z = 0.0;
  for (int j = 0; j < n.size; ++j) z += (y[j] = std::exp(xv[j] - mx));
  for (int j = 0; j < n.size; ++j) y[j] /= z;
  return v;
}

Var Tape::AttendPerDim(Var query, std::span<const Var> keys, std::span<const Var> values,
                       double slope) {
  Require(!values.empty(), "attention over an empty state set");
  Require(keys.size() == values.size(), "attention keys/values count mismatch");
  const Node& qn = node(query);
  const int width = qn.size;
  const int count = static_cast<int>(values.size());
  Node n{Op::kAttend};
  n.size = width;
  n.a = query.id;
  n.scalar = slope;
  n.needs_grad = qn.needs_grad;
  n.args_begin = static_cast<int>(args_.size());
  n.args_count = 2 * count;
  for (Var k : keys) {
    Require(node(k).size == width, "attention key width mismatch");
    n.needs_grad = n.needs_grad || nodes_[k.id].needs_grad;
    args_.push_back(k.id);
  }
  for (Var h : values) {
    Require(node(h).size == width, "attention value width mismatch");
    n.needs_grad = n.needs_grad || nodes_[h.id].needs_grad;
    args_.push_back(h.id);
  }
  // extra_: pre-activations then alphas, each count x width.
  n.extra = static_cast<int>(extra_.size());
  extra_.resize(extra_.size() + 2 * static_cast<std::size_t>(count) * width);
  Var v = Push(n);

  double* pre = extra_.data() + n.extra;
  double* alpha = pre + static_cast<std::size_t>(count) * width;
  const double* q = val(query.id);
  for (int i = 0; i < count; ++i) {
    const double* kv = val(keys[i].id);
    for (int k = 0; k < width; ++k) pre[i * width + k] = q[k] + kv[k];
  }
  double* y = val(v.id);
  for (int k = 0; k < width; ++k) {
    double mx = -INFINITY;
    for (int i = 0; i < count; ++i) {
      const double p = pre[i * width + k];
      const double s = p >= 0.0 ? p : slope * p;
      alpha[i * width + k] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (int i = 0; i < count; ++i) {
      z += (alpha[i * width + k] = std::exp(alpha[i * width + k] - mx));
    }
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
      alpha[i * width + k] /= z;
      acc += alpha[i * width + k] * val(values[i].id)[k];
    }
    y[k] = acc;
  }
  return v;
}

Var Tape::SoftmaxCrossEntropy(Var logits, int target) {
  const Node& ln = node(logits);
  Require(target >= 0 && target < ln.size, "cross-entropy target out of range");
  Node n{Op::kSoftmaxXent};
  n.size = 1;
  n.a = logits.id;
  n.aux = target;
  n.needs_grad = ln.needs_grad;
  n.extra = static_cast<int>(extra_.size());
  const int width = ln.size;
  extra_.resize(extra_.size() + width);
  Var v = Push(n);
  double* p = extra_.data() + n.extra;
  const double* x = val(logits.id);
  const double mx = *std::max_element(x, x + width);
  double z = 0.0;
  for (int j = 0; j < width; ++j) z += (p[j] = std::exp(x[j] - mx));
  for (int j = 0; j < width; ++j) p[j] /= z;
  val(v.id)[0] = -std::log(p[target] + kProbClip);
  return v;
}

Var Tape::SumScalars(std::span<const Var> terms, double scale) {
  Node n{Op::kSumScalars};
  n.size = 1;
  n.scalar = scale;
  n.args_begin = static_cast<int>(args_.size());
  n.args_count = static_cast<int>(terms.size());
  for (Var t : terms) {
    Require(node(t).size == 1, "sum of non-scalar");
    n.needs_grad = n.needs_grad || nodes_[t.id].needs_grad;
    args_.push_back(t.id);
  }
  Var v = Push(n);
  double acc = 0.0;
  for (Var t : terms) acc += val(t.id)[0];
  val(v.id)[0] = scale * acc;
  return v;
}

std::vector<std::vector<double>> Tape::AttentionWeights(Var attended) const {
  const Node& n = node(attended);
  Require(n.op == Op::kAttend, "not an attention node");
  const int count = n.args_count / 2;
  const double* alpha = extra_.data() + n.extra + static_cast<std::size_t>(count) * n.size;
  std::vector<std::vector<double>> out(count);
  for (int i = 0; i < count; ++i) out[i].assign(alpha + i * n.size, alpha + (i + 1) * n.size);
  return out;
}

std::span<const double> Tape::Probabilities(Var loss) const {
  const Node& n = node(loss);
  Require(n.op == Op::kSoftmaxXent, "not a cross-entropy node");
  return {extra_.data() + n.extra, static_cast<std::size_t>(nodes_[n.a].size)};
}

void Tape::Backward(Var root) {
  const Node& rn = node(root);
  Require(rn.size == 1, "backward root must be scalar");
  Require(mutable_params_ != nullptr, "backward on a forward-only tape");
  std::fill(grads_.begin(), grads_.end(), 0.0);
  grads_[rn.offset] = 1.0;

  for (int id = root.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (!n.needs_grad) continue;
    const double* g = grads_.data() + n.offset;
    const double* y = values_.data() + n.offset;
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kRow: {
        Tensor& gt = mutable_params_->at(n.param).grad;
        auto row = gt.row(n.aux);
        for (int j = 0; j < n.size; ++j) row[j] += g[j];
        break;
      }
      case Op::kMatVec: {
        const Tensor& w = params_->value(n.param);
        Tensor& gw = mutable_params_->at(n.param).grad;
        const Node& xn = nodes_[n.a];
        const double* x = values_.data() + xn.offset;
        double* gx = grads_.data() + xn.offset;
        const int cols = n.size;
        for (int k = 0; k < xn.size; ++k) {
          const std::size_t r = static_cast<std::size_t>(n.aux + k) * cols;
          const double* wr = w.data() + r;
          double* gwr = gw.data() + r;
          const double xk = x[k];
          double acc = 0.0;
          for (int j = 0; j < cols; ++j) {
            acc += wr[j] * g[j];
            gwr[j] += xk * g[j];
          }
          if (xn.needs_grad) gx[k] += acc;
        }
        break;
      }
      case Op::kAddBias: {
        Tensor& gb = mutable_params_->at(n.param).grad;
        for (int j = 0; j < n.size; ++j) gb[j] += g[j];
        if (nodes_[n.a].needs_grad) {
          double* gx = grd(n.a);
          for (int j = 0; j < n.size; ++j) gx[j] += g[j];
        }
        break;
      }
      case Op::kAdd: {
        for (int t = 0; t < n.args_count; ++t) {
          const int tid = args_[n.args_begin + t];
          if (!nodes_[tid].needs_grad) continue;
          double* gt = grd(tid);
          for (int j = 0; j < n.size; ++j) gt[j] += g[j];
        }
        break;
      }
      case Op::kMul: {
        const double* av = val(n.a);
        const double* bv = val(n.b);
        if (nodes_[n.a].needs_grad) {
          double* ga = grd(n.a);
          for (int j = 0; j < n.size; ++j) ga[j] += g[j] * bv[j];
        }
        if (nodes_[n.b].needs_grad) {
          double* gb = grd(n.b);
          for (int j = 0; j < n.size; ++j) gb[j] += g[j] * av[j];
        }
        break;
      }
      case Op::kSigmoid: {
        double* gx = grd(n.a);
        for (int j = 0; j < n.size; ++j) gx[j] += g[j] * y[j] * (1.0 - y[j]);
        break;
      }
      case Op::kTanh: {
        double* gx = grd(n.a);
        for (int j = 0; j < n.size; ++j) gx[j] += g[j] * (1.0 - y[j] * y[j]);
        break;
      }
      case Op::kLeakyRelu: {
        const double* x = val(n.a);
        double* gx = grd(n.a);
        for (int j = 0; j < n.size; ++j) gx[j] += g[j] * (x[j] >= 0.0 ? 1.0 : n.scalar);
        break;
      }
      case Op::kConcat: {
        int pos = 0;
        for (int t = 0; t < n.args_count; ++t) {
          const int pid = args_[n.args_begin + t];
          const int s = nodes_[pid].size;
          if (nodes_[pid].needs_grad) {
            double* gp = grd(pid);
            for (int j = 0; j < s; ++j) gp[j] += g[pos + j];
          }
          pos += s;
        }
        break;
      }
      case Op::kSoftmax: {
        double dot = 0.0;
        for (int j = 0; j < n.size; ++j) dot += g[j] * y[j];
        double* gx = grd(n.a);
        for (int j = 0; j < n.size; ++j) gx[j] += y[j] * (g[j] - dot);
        break;
      }
      case Op::kAttend: {
        const int count = n.args_count / 2;
        const int width = n.size;
        const double* pre = extra_.data() + n.extra;
        const double* alpha = pre + static_cast<std::size_t>(count) * width;
        const int* key_ids = args_.data() + n.args_begin;
        const int* value_ids = key_ids + count;
        const bool q_grad = nodes_[n.a].needs_grad;
        double* gq = grd(n.a);
        for (int i = 0; i < count; ++i) {
          const bool k_grad = nodes_[key_ids[i]].needs_grad;
          const bool v_grad = nodes_[value_ids[i]].needs_grad;
          const double* h = val(value_ids[i]);
          double* gk = grd(key_ids[i]);
          double* gh = grd(value_ids[i]);
          for (int k = 0; k < width; ++k) {
            const double a = alpha[i * width + k];
            if (v_grad) gh[k] += a * g[k];
            const double p = pre[i * width + k];
            const double ds = a * (h[k] - y[k]) * g[k] * (p >= 0.0 ? 1.0 : n.scalar);
            if (k_grad) gk[k] += ds;
            if (q_grad) gq[k] += ds;
          }
        }
        break;
      }
      case Op::kSoftmaxXent: {
        const double* p = extra_.data() + n.extra;
        const int width = nodes_[n.a].size;
        const double pt = p[n.aux];
        const double s = g[0] * pt / (pt + kProbClip);
        double* gx = grd(n.a);
        for (int j = 0; j < width; ++j) gx[j] += s * (p[j] - (j == n.aux ? 1.0 : 0.0));
        break;
      }
      case Op::kSumScalars: {
        for (int t = 0; t < n.args_count; ++t) {
          const int tid = args_[n.args_begin + t];
          if (nodes_[tid].needs_grad) grads_[nodes_[tid].offset] += n.scalar * g[0];
        }
        break;
      }
    }
  }
}

}  // namespace stodppa::nn
