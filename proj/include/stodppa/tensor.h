#ifndef STODPPA_TENSOR_H_
#define STODPPA_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stodppa/errors.h"

namespace stodppa::nn {

// Dense row-major tensor of doubles. Rank 1 and 2 are all the models need.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(Count(shape_), fill) {}
  Tensor(std::vector<int> shape, std::vector<double> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != Count(shape_)) throw ContractError("tensor value count mismatch");
  }

  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * cols(), static_cast<std::size_t>(cols())};
  }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols(), static_cast<std::size_t>(cols())};
  }

  void Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t Count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw ContractError("negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::vector<int> shape_;
  std::vector<double> data_;
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

using ParamId = int;

// Owns every trainable tensor of a model in registration order. Models refer
// to parameters by id, so copying a store copies a whole model.
class ParamStore {
 public:
  ParamId Add(std::string name, Tensor value) {
    for (const Param& p : params_) {
      if (p.name == name) throw ContractError("duplicate parameter name " + name);
    }
    Tensor grad(value.shape());
    params_.push_back({std::move(name), std::move(value), std::move(grad)});
    return static_cast<ParamId>(params_.size() - 1);
  }

  Param& at(ParamId id) { return params_.at(id); }
  const Param& at(ParamId id) const { return params_.at(id); }
  Tensor& value(ParamId id) { return params_.at(id).value; }
  const Tensor& value(ParamId id) const { return params_.at(id).value; }

  ParamId Find(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == name) return static_cast<ParamId>(i);
    }
    return -1;
  }

  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const {
    std::size_t n = 0;
    for (const Param& p : params_) n += p.value.size();
    return n;
  }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }

  void ZeroGrad() {
    for (Param& p : params_) p.grad.Fill(0.0);
  }

 private:
  std::vector<Param> params_;
};

}  // namespace stodppa::nn

#endif  // STODPPA_TENSOR_H_
