#pragma once

#include <map>
#include <string>
#include <vector>

#include "lemma/rng.hpp"
#include "lemma/tensor.hpp"

namespace lemma {

struct Parameter {
  std::string name;
  Tensor tensor;
  std::string init_spec;
};

// Registry of named trainable tensors plus non-trainable state buffers
// (BN running statistics). Names are unique dotted paths.
class ParamStore {
 public:
  explicit ParamStore(uint64_t init_seed) : rng_(init_seed) {}

  // U(-sqrt(1/fan_in), sqrt(1/fan_in))
  Tensor fan_in_uniform(const std::string& name, Shape shape, int fan_in);
  Tensor normal(const std::string& name, Shape shape, double stddev);
  Tensor constant(const std::string& name, Shape shape, double value);
  Tensor from_values(const std::string& name, Shape shape, std::vector<double> values,
                     const std::string& init_spec);

  Tensor buffer(const std::string& name, Shape shape, double fill);

  bool has(const std::string& name) const { return by_name_.count(name) > 0; }
  Tensor get(const std::string& name) const;

  // parameters in registration order
  const std::vector<Parameter>& params() const { return params_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& buffers() const { return buffers_; }
  std::vector<Parameter>& buffers() { return buffers_; }

  int64_t total_param_count() const;
  // trainable parameter count under a name prefix
  int64_t param_count_with_prefix(const std::string& prefix) const;

  void zero_grads();

 private:
  Tensor register_param(const std::string& name, Tensor t, const std::string& init_spec);
  Rng rng_;
  std::vector<Parameter> params_;
  std::vector<Parameter> buffers_;
  std::map<std::string, Tensor> by_name_;
};

}  // namespace lemma
