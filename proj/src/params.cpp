#include "lemma/params.hpp"

#include <cmath>

namespace lemma {

Tensor ParamStore::register_param(const std::string& name, Tensor t, const std::string& init_spec) {
  if (by_name_.count(name)) fail("ParamStore: duplicate parameter name '" + name + "'");
  t.set_requires_grad(true);
  params_.push_back({name, t, init_spec});
  by_name_.emplace(name, t);
  return t;
}

Tensor ParamStore::fan_in_uniform(const std::string& name, Shape shape, int fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(static_cast<size_t>(numel(shape)));
  for (double& e : v) e = rng_.uniform(-bound, bound);
  return register_param(name, Tensor::from_vector(std::move(shape), std::move(v)),
                        "uniform(fan_in=" + std::to_string(fan_in) + ")");
}

Tensor ParamStore::normal(const std::string& name, Shape shape, double stddev) {
  std::vector<double> v(static_cast<size_t>(numel(shape)));
  for (double& e : v) e = rng_.normal() * stddev;
  return register_param(name, Tensor::from_vector(std::move(shape), std::move(v)),
                        "normal(std=" + std::to_string(stddev) + ")");
}

Tensor ParamStore::constant(const std::string& name, Shape shape, double value) {
  return register_param(name, Tensor::full(std::move(shape), value),
                        "constant(" + std::to_string(value) + ")");
}

Tensor ParamStore::from_values(const std::string& name, Shape shape, std::vector<double> values,
                               const std::string& init_spec) {
  return register_param(name, Tensor::from_vector(std::move(shape), std::move(values)), init_spec);
}

Tensor ParamStore::buffer(const std::string& name, Shape shape, double fill) {
  if (by_name_.count(name)) fail("ParamStore: duplicate buffer name '" + name + "'");
  Tensor t = Tensor::full(std::move(shape), fill);
  buffers_.push_back({name, t, "buffer"});
  by_name_.emplace(name, t);
  return t;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) fail("ParamStore: no parameter named '" + name + "'");
  return it->second;
}

int64_t ParamStore::total_param_count() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

int64_t ParamStore::param_count_with_prefix(const std::string& prefix) const {
  int64_t n = 0;
  for (const auto& p : params_)
    if (p.name.rfind(prefix, 0) == 0) n += p.tensor.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace lemma
