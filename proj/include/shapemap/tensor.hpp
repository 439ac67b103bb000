#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "shapemap/error.hpp"

namespace shapemap {

namespace detail {

struct Node {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;  // same length as data iff requires_grad
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    int numel() const { return static_cast<int>(data.size()); }
};

bool grad_enabled();

}  // namespace detail

// Dense n-dimensional array of 64-bit floats with reverse-mode gradients.
// Value-like handle: copies share the underlying node.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const;
    int ndim() const { return static_cast<int>(shape().size()); }
    int dim(int axis) const;
    int numel() const;

    std::vector<double>& data();
    const std::vector<double>& data() const;
    bool requires_grad() const;
    const std::vector<double>& grad() const;

    // Value of a rank-<=1 tensor with a single element.
    double item() const;

    // True when data (and grad, if present) contain no NaN/Inf.
    bool all_finite() const;

    void zero_grad();

    // Reverse pass from a scalar; seeds d(this)/d(this) = 1 and accumulates
    // into every reachable tensor with requires_grad.
    void backward();

    // Deep copy of values only (fresh node, no graph history).
    Tensor detached_copy(bool requires_grad = false) const;

    std::shared_ptr<detail::Node> node() const { return node_; }
    static Tensor wrap(std::shared_ptr<detail::Node> node);

  private:
    std::shared_ptr<detail::Node> node_;
};

// RAII switch that disables graph construction on this thread (evaluation
// mode forward passes).
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

  private:
    bool previous_;
};

int shape_numel(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

}  // namespace shapemap
