#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lemma {

// Process-wide numeric mode. f64 is the verification mode: full double
// precision plus a finiteness check after every op. f32 is the training
// mode: every stored value is rounded through IEEE binary32, so results
// carry single precision while arithmetic still accumulates in double.
enum class Precision { f64, f32 };

void set_precision(Precision p);
Precision precision();

using Shape = std::vector<int>;

int64_t numel(const Shape& s);
std::string shape_str(const Shape& s);
std::vector<int64_t> row_major_strides(const Shape& s);

class Tensor;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until backward touches this node
  bool requires_grad = false;
  std::vector<Tensor> parents;
  // Accumulates this node's grad into its parents' grads.
  std::function<void(Node&)> backward;
  const char* op_name = "leaf";

  int64_t size() const { return static_cast<int64_t>(value.size()); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
  }
};

// Cheap-to-copy handle over a tape node. Values are immutable after an op
// produces them; only leaves (parameters, inputs under construction) are
// written through data().
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from_vector(Shape shape, std::vector<double> v, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const { return n_->shape; }
  int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(n_->shape.size()); }
  int64_t size() const { return n_->size(); }

  const std::vector<double>& data() const { return n_->value; }
  std::vector<double>& data() { return n_->value; }
  double item() const;

  double at(std::initializer_list<int> idx) const;

  bool requires_grad() const { return n_->requires_grad; }
  void set_requires_grad(bool b) { n_->requires_grad = b; }

  bool has_grad() const { return !n_->grad.empty(); }
  const std::vector<double>& grad() const { return n_->grad; }
  std::vector<double>& grad_mut() {
    n_->ensure_grad();
    return n_->grad;
  }
  void zero_grad() {
    if (!n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), 0.0);
  }

  // Reverse pass from a scalar output. Gradients accumulate by addition
  // into every reachable node with requires_grad.
  void backward() const;

  Tensor detach() const;

  Node* node() const { return n_.get(); }

  // Used by op implementations.
  static Tensor make(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                     std::function<void(Node&)> backward, const char* op_name);

 private:
  std::shared_ptr<Node> n_;
};

// Rounds v through binary32 when in f32 mode and verifies finiteness in
// f64 mode. Every op calls this on its freshly computed output.
void finalize_values(std::vector<double>& v, const char* op_name);

[[noreturn]] void fail(const std::string& msg);

}  // namespace lemma
