#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

namespace se3net {

// Dense row-major 64-bit float array. Shared-handle semantics: copies
// alias the same storage, which is what the tape records.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, bool requires_grad = false);

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value,
                     bool requires_grad = false);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int>& shape() const;
  int rank() const;
  int dim(int axis) const;
  int numel() const;

  bool requires_grad() const;
  void set_requires_grad(bool rg);

  std::vector<double>& data();
  const std::vector<double>& data() const;

  bool has_grad() const;
  // Allocates a zero grad buffer on first use.
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();
  void drop_grad();

  double value() const;  // scalar tensors only

  double& at(int i);
  double& at(int i, int j);
  double& at(int i, int j, int k);
  double& at(int i, int j, int k, int l);
  double at(int i) const;
  double at(int i, int j) const;
  double at(int i, int j, int k) const;
  double at(int i, int j, int k, int l) const;

  // Deep copy of shape/data (grad not copied).
  Tensor clone() const;

  const void* id() const { return impl_.get(); }

 private:
  struct Impl {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

std::string shape_str(const std::vector<int>& s);

// Tape of executed operations. Single-threaded per instance; independent
// graphs may run concurrently. backward() may be called once per tape.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
                int pad);
  // Transposed convolution: exact adjoint of conv2d's forward map for the
  // same weights. x has w.dim(0) channels, output has w.dim(1).
  Tensor deconv2d(const Tensor& x, const Tensor& w, const Tensor& b,
                  int stride, int pad);
  Tensor prelu(const Tensor& x, const Tensor& slope);
  Tensor channel_softmax(const Tensor& x);
  Tensor mse_loss(const Tensor& pred, const Tensor& target);
  // Mean over pixels with weight > 0 of the weighted squared channel-vector
  // error: sum_j w_j |p_j - t_j|^2 / sum_j w_j. Weights carry no gradient.
  Tensor weighted_mse_loss(const Tensor& pred, const Tensor& target,
                           const Tensor& pixel_weights);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double s);
  Tensor reshape(const Tensor& a, std::vector<int> shape);
  Tensor concat(const std::vector<Tensor>& parts, int axis);
  Tensor slice(const Tensor& a, int offset, int length);  // rank-1

  void backward(const Tensor& loss);
  void reset();
  size_t node_count() const { return nodes_.size(); }
  bool produced(const Tensor& t) const;

  // Hooks for fused ops defined in higher layers.
  Tensor emit(std::vector<int> shape, bool requires_grad);
  void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

 private:
  std::vector<std::function<void()>> nodes_;
  std::unordered_set<const void*> produced_;
  bool backward_done_ = false;
};

// Max over elements of |analytic - central difference| / max(1, |numeric|)
// for a scalar-valued builder f. f must be pure in (graph, x).
double finite_diff_check(const std::function<Tensor(Graph&, const Tensor&)>& f,
                         const Tensor& x0, double eps);

}  // namespace se3net
