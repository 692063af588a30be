#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace exnet::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

enum class Mode { kTrain, kEval };

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  bool is_leaf() const { return !backward_fn; }

  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
};

}  // namespace detail

// Graph recording is on by default; a guard turns it off for the current
// thread (inference paths).
bool grad_enabled() noexcept;

class NoGradGuard {
 public:
  NoGradGuard() noexcept;
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Row-major dense array that records the operations producing it so that
/// gradients can be propagated back to leaves created with requires_grad.
///
/// Copies are shallow: two Tensor handles may refer to the same node. Data of
/// a non-leaf is never modified after construction; leaves (parameters) are
/// updated in place by the optimizer through mutable_data().
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodeType = detail::Node<T>;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size(std::size_t axis) const;
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  T operator[](std::size_t flat_index) const { return node_->data[flat_index]; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value);
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  // Propagates d(this)/d(leaf) into every requires_grad leaf reachable from
  // this scalar. Leaf gradients accumulate across calls; intermediate
  // gradients are recomputed each call.
  void backward() const;

  // Same values, no history, no grad.
  Tensor detach() const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> values(numel());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<U>(node_->data[i]);
    return Tensor<U>::from_data(shape(), std::move(values));
  }

  const std::shared_ptr<NodeType>& node() const { return node_; }

  // Builds an op result. History is attached only when recording is enabled
  // and some parent requires grad.
  static Tensor make_result(Shape shape, std::vector<T> values, std::vector<Tensor> parents,
                            std::function<void(NodeType&)> backward_fn);

 private:
  explicit Tensor(std::shared_ptr<NodeType> node) : node_(std::move(node)) {}

  std::shared_ptr<NodeType> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace exnet::numerics
