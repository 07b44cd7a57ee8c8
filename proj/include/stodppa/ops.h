#ifndef STODPPA_OPS_H_
#define STODPPA_OPS_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "stodppa/errors.h"

namespace stodppa::nn {

inline constexpr double kLeakySlope = 0.01;

inline double LeakyRelu(double x, double slope = kLeakySlope) { return x >= 0.0 ? x : slope * x; }

// Max-subtracted softmax.
inline std::vector<double> Softmax(std::span<const double> x) {
  if (x.empty()) throw ContractError("softmax of empty vector");
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> y(x.size());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) z += (y[i] = std::exp(x[i] - mx));
  for (double& v : y) v /= z;
  return y;
}

// -log(p[target] + 1e-12) for a probability vector p.
inline double CrossEntropy(std::span<const double> probs, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= probs.size()) {
    throw ContractError("cross-entropy target out of range");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ContractError("invalid probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ContractError("probabilities do not sum to 1");
  return -std::log(probs[target] + 1e-12);
}

}  // namespace stodppa::nn

#endif  // STODPPA_OPS_H_
