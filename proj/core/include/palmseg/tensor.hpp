#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "palmseg/errors.hpp"

namespace palmseg {

/// Row-major extents, batch x channel x height x width for activations.
using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense N-dimensional array with differentiation bookkeeping.
///
/// A TensorT is a shared handle: copies refer to the same storage, which is
/// what lets recorded backward rules and optimizer state see parameter
/// updates. Use clone() for an independent deep copy. The element type is
/// float for training and double when gradient-checking.
template <typename T>
class TensorT {
public:
  TensorT() = default;

  static TensorT zeros(Shape shape, bool requires_grad = false);
  static TensorT full(Shape shape, T value, bool requires_grad = false);
  static TensorT from_vector(Shape shape, std::vector<T> values,
                             bool requires_grad = false);

  bool defined() const { return static_cast<bool>(store_); }
  const Shape& shape() const;
  size_t rank() const;
  int64_t dim(size_t axis) const;
  int64_t numel() const;

  std::span<T> data();
  std::span<const T> data() const;

  bool requires_grad() const;
  void set_requires_grad(bool value);

  /// Gradient buffer, allocated zero-filled on first access.
  std::span<T> grad();
  bool has_grad() const;
  void zero_grad();

  /// Value of a single-element tensor.
  T item() const;

  /// Independent deep copy (data only, gradient not carried over).
  TensorT clone() const;

  /// Identity of the underlying storage; two handles alias iff equal.
  const void* storage_id() const { return store_.get(); }

private:
  struct Store {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until first requested
    bool requires_grad = false;
  };

  std::shared_ptr<Store> store_;

  Store& checked() const;
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

/// Ordered record of executed differentiable operations.
///
/// Ops append themselves while a graph is active (see GraphScopeT); backward
/// zeroes the gradients of every recorded tensor, seeds d(loss) = 1 and then
/// runs the recorded rules in exact reverse execution order. A graph is
/// confined to one thread for its lifetime.
template <typename T>
class GraphT {
public:
  GraphT() = default;
  GraphT(const GraphT&) = delete;
  GraphT& operator=(const GraphT&) = delete;

  void record(std::vector<TensorT<T>> tensors, std::function<void()> backward);
  void backward(TensorT<T>& loss);
  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// Tape ops currently record into, or nullptr outside any GraphScopeT.
  static GraphT* active();

private:
  struct Node {
    std::vector<TensorT<T>> tensors;
    std::function<void()> backward;
  };

  std::vector<Node> nodes_;

  friend class GraphScopeGuard;
};

/// RAII activation of a graph on the current thread. Ops run outside any
/// scope compute values only and record nothing.
template <typename T>
class GraphScopeT {
public:
  explicit GraphScopeT(GraphT<T>& graph);
  ~GraphScopeT();
  GraphScopeT(const GraphScopeT&) = delete;
  GraphScopeT& operator=(const GraphScopeT&) = delete;

private:
  GraphT<T>* previous_;
};

using Graph = GraphT<float>;
using GraphD = GraphT<double>;
using GraphScope = GraphScopeT<float>;
using GraphScopeD = GraphScopeT<double>;

extern template class TensorT<float>;
extern template class TensorT<double>;
extern template class GraphT<float>;
extern template class GraphT<double>;
extern template class GraphScopeT<float>;
extern template class GraphScopeT<double>;

}  // namespace palmseg
