#ifndef STODPPA_OPTIM_H_
#define STODPPA_OPTIM_H_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "stodppa/tensor.h"

namespace stodppa::nn {

using Rng = std::mt19937_64;

// Glorot-uniform matrix: U(-a, a), a = sqrt(6 / (rows + cols)).
Tensor GlorotUniform(int rows, int cols, Rng& rng);
Tensor UniformTensor(std::vector<int> shape, double bound, Rng& rng);

class Adam {
 public:
  struct Options {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  explicit Adam(const ParamStore& params, Options options);

  // One update from the accumulated gradients, then zeroes them.
  void Step(ParamStore& params);

  long step_count() const { return t_; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  long t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

struct GradCheckResult {
  // Per coordinate: |a - n| / max(|a|, |n|, 1e-8).
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  // Per parameter tensor: max_k |a_k - n_k| / max(max_k |a_k|, max_k |n_k|, 1e-8).
  double max_tensor_rel_error = 0.0;
  std::string worst_tensor;
};

// `loss(backward)` evaluates the scalar loss at the store's current values
// and, when `backward` is set, accumulates analytic gradients into the store.
// Compares against central differences. Parameter values are restored
// afterwards.
GradCheckResult GradCheck(ParamStore& params, const std::function<double(bool)>& loss,
                          double h = 1e-5);

}  // namespace stodppa::nn

#endif  // STODPPA_OPTIM_H_
