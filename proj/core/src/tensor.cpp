#include "palmseg/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace palmseg {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

template <typename T>
typename TensorT<T>::Store& TensorT<T>::checked() const {
  if (!store_) throw Error("tensor: use of an undefined tensor");
  return *store_;
}

template <typename T>
TensorT<T> TensorT<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
TensorT<T> TensorT<T>::full(Shape shape, T value, bool requires_grad) {
  for (int64_t d : shape) {
    if (d <= 0)
      throw DimensionError("tensor: non-positive extent in shape " +
                           shape_str(shape));
  }
  TensorT t;
  t.store_ = std::make_shared<Store>();
  t.store_->shape = std::move(shape);
  t.store_->data.assign(static_cast<size_t>(shape_numel(t.store_->shape)),
                        value);
  t.store_->requires_grad = requires_grad;
  return t;
}

template <typename T>
TensorT<T> TensorT<T>::from_vector(Shape shape, std::vector<T> values,
                                   bool requires_grad) {
  if (shape_numel(shape) != static_cast<int64_t>(values.size()))
    throw DimensionError("tensor: " + std::to_string(values.size()) +
                         " values do not fill shape " + shape_str(shape));
  TensorT t;
  t.store_ = std::make_shared<Store>();
  t.store_->shape = std::move(shape);
  t.store_->data = std::move(values);
  t.store_->requires_grad = requires_grad;
  return t;
}

template <typename T>
const Shape& TensorT<T>::shape() const {
  return checked().shape;
}

template <typename T>
size_t TensorT<T>::rank() const {
  return checked().shape.size();
}

template <typename T>
int64_t TensorT<T>::dim(size_t axis) const {
  const Shape& s = checked().shape;
  if (axis >= s.size())
    throw DimensionError("tensor: axis " + std::to_string(axis) +
                         " out of range for shape " + shape_str(s));
  return s[axis];
}

template <typename T>
int64_t TensorT<T>::numel() const {
  return shape_numel(checked().shape);
}

template <typename T>
std::span<T> TensorT<T>::data() {
  return checked().data;
}

template <typename T>
std::span<const T> TensorT<T>::data() const {
  return checked().data;
}

template <typename T>
bool TensorT<T>::requires_grad() const {
  return checked().requires_grad;
}

template <typename T>
void TensorT<T>::set_requires_grad(bool value) {
  checked().requires_grad = value;
}

template <typename T>
std::span<T> TensorT<T>::grad() {
  Store& s = checked();
  if (s.grad.empty()) s.grad.assign(s.data.size(), T(0));
  return s.grad;
}

template <typename T>
bool TensorT<T>::has_grad() const {
  return defined() && !store_->grad.empty();
}

template <typename T>
void TensorT<T>::zero_grad() {
  Store& s = checked();
  std::fill(s.grad.begin(), s.grad.end(), T(0));
}

template <typename T>
T TensorT<T>::item() const {
  const Store& s = checked();
  if (s.data.size() != 1)
    throw DimensionError("tensor: item() on tensor of shape " +
                         shape_str(s.shape));
  return s.data[0];
}

template <typename T>
TensorT<T> TensorT<T>::clone() const {
  const Store& s = checked();
  TensorT t;
  t.store_ = std::make_shared<Store>();
  t.store_->shape = s.shape;
  t.store_->data = s.data;
  t.store_->requires_grad = s.requires_grad;
  return t;
}

namespace {
template <typename T>
thread_local GraphT<T>* t_active_graph = nullptr;
}  // namespace

template <typename T>
GraphT<T>* GraphT<T>::active() {
  return t_active_graph<T>;
}

template <typename T>
void GraphT<T>::record(std::vector<TensorT<T>> tensors,
                       std::function<void()> backward) {
  nodes_.push_back(Node{std::move(tensors), std::move(backward)});
}

template <typename T>
void GraphT<T>::backward(TensorT<T>& loss) {
  if (loss.numel() != 1)
    throw DimensionError("graph: backward needs a scalar loss, got shape " +
                         shape_str(loss.shape()));
  for (Node& node : nodes_)
    for (TensorT<T>& t : node.tensors)
      if (t.requires_grad()) {
        t.grad();  // allocate
        t.zero_grad();
      }
  loss.grad()[0] = T(1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward();
}

template <typename T>
GraphScopeT<T>::GraphScopeT(GraphT<T>& graph) {
  previous_ = t_active_graph<T>;
  t_active_graph<T> = &graph;
}

template <typename T>
GraphScopeT<T>::~GraphScopeT() {
  t_active_graph<T> = previous_;
}

template class TensorT<float>;
template class TensorT<double>;
template class GraphT<float>;
template class GraphT<double>;
template class GraphScopeT<float>;
template class GraphScopeT<double>;

}  // namespace palmseg
