#include "stodppa/optim.h"

#include <algorithm>
#include <cmath>

namespace stodppa::nn {

Tensor GlorotUniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  return UniformTensor({rows, cols}, bound, rng);
}

Tensor UniformTensor(std::vector<int> shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Adam::Adam(const ParamStore& params, Options options) : options_(options) {
  for (const Param& p : params.params()) {
    m_.emplace_back(p.value.shape());
    v_.emplace_back(p.value.shape());
  }
}

void Adam::Step(ParamStore& params) {
  if (params.size() != m_.size()) throw ContractError("optimizer/parameter count mismatch");
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = params.params()[i];
    double* w = p.value.data();
    double* g = p.grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const std::size_t n = p.value.size();
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      w[k] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
      g[k] = 0.0;
    }
  }
}

GradCheckResult GradCheck(ParamStore& params, const std::function<double(bool)>& loss,
                          double h) {
  params.ZeroGrad();
  loss(true);
  std::vector<Tensor> analytic;
  for (const Param& p : params.params()) analytic.push_back(p.grad);
  params.ZeroGrad();

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = params.params()[pi];
    double diff_max = 0.0, mag_max = 0.0;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + h;
      const double plus = loss(false);
      p.value[k] = saved - h;
      const double minus = loss(false);
      p.value[k] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[pi][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      diff_max = std::max(diff_max, std::abs(a - numeric));
      mag_max = std::max({mag_max, std::abs(a), std::abs(numeric)});
      ++result.coordinates;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p.name;
        result.worst_index = k;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
    const double tensor_rel = diff_max / std::max(mag_max, 1e-8);
    if (tensor_rel > result.max_tensor_rel_error) {
      result.max_tensor_rel_error = tensor_rel;
      result.worst_tensor = p.name;
    }
  }
  return result;
}

}  // namespace stodppa::nn
