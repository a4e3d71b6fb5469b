#include "lemma/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace lemma {

namespace {
Precision g_precision = Precision::f64;
}

void set_precision(Precision p) { g_precision = p; }
Precision precision() { return g_precision; }

int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << "]";
  return os.str();
}

std::vector<int64_t> row_major_strides(const Shape& s) {
  std::vector<int64_t> st(s.size(), 1);
  for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i)
    st[static_cast<size_t>(i)] = st[static_cast<size_t>(i) + 1] * s[static_cast<size_t>(i) + 1];
  return st;
}

void fail(const std::string& msg) { throw std::runtime_error(msg); }

void finalize_values(std::vector<double>& v, const char* op_name) {
  if (g_precision == Precision::f32) {
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  } else {
    for (double x : v) {
      if (!std::isfinite(x)) fail(std::string("non-finite value produced by op '") + op_name + "'");
    }
  }
}

Tensor Tensor::make(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                    std::function<void(Node&)> backward, const char* op_name) {
  if (static_cast<int64_t>(value.size()) != numel(shape))
    fail(std::string("op '") + op_name + "': value size " + std::to_string(value.size()) +
         " does not match shape " + shape_str(shape));
  finalize_values(value, op_name);
  Tensor t;
  t.n_ = std::make_shared<Node>();
  t.n_->shape = std::move(shape);
  t.n_->value = std::move(value);
  t.n_->op_name = op_name;
  bool rg = false;
  for (const Tensor& p : parents) rg = rg || p.requires_grad();
  t.n_->requires_grad = rg;
  if (rg) {
    t.n_->parents = std::move(parents);
    t.n_->backward = std::move(backward);
  }
  return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(static_cast<size_t>(numel(shape)), 0.0);
  Tensor t = make(std::move(shape), std::move(v), {}, nullptr, "leaf");
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::full(Shape shape, double val, bool requires_grad) {
  std::vector<double> v(static_cast<size_t>(numel(shape)), val);
  Tensor t = make(std::move(shape), std::move(v), {}, nullptr, "leaf");
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> v, bool requires_grad) {
  Tensor t = make(std::move(shape), std::move(v), {}, nullptr, "leaf");
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_vector({1}, {v}, requires_grad);
}

double Tensor::item() const {
  if (size() != 1) fail("item() on tensor of shape " + shape_str(shape()));
  return n_->value[0];
}

double Tensor::at(std::initializer_list<int> idx) const {
  const Shape& s = n_->shape;
  if (idx.size() != s.size()) fail("at(): rank mismatch for shape " + shape_str(s));
  auto st = row_major_strides(s);
  int64_t off = 0;
  size_t i = 0;
  for (int v : idx) {
    if (v < 0 || v >= s[i]) fail("at(): index out of range for shape " + shape_str(s));
    off += st[i] * v;
    ++i;
  }
  return n_->value[static_cast<size_t>(off)];
}

Tensor Tensor::detach() const {
  Tensor t;
  t.n_ = std::make_shared<Node>();
  t.n_->shape = n_->shape;
  t.n_->value = n_->value;
  t.n_->requires_grad = false;
  t.n_->op_name = "detach";
  return t;
}

void Tensor::backward() const {
  if (!defined()) fail("backward() on undefined tensor");
  if (size() != 1) fail("backward() requires a scalar output, got shape " + shape_str(shape()));
  if (!n_->requires_grad) return;

  // Iterative topological order over the requires_grad subgraph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(n_.get(), 0);
  visited.insert(n_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next].node();
      ++next;
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  n_->ensure_grad();
  n_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward) {
      for (Tensor& p : node->parents)
        if (p.requires_grad()) p.node()->ensure_grad();
      node->backward(*node);
    }
  }
}

}  // namespace lemma
