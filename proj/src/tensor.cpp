#include "shapemap/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace shapemap {

namespace detail {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

}  // namespace detail

NoGradGuard::NoGradGuard() : previous_(detail::grad_enabled()) {
    detail::g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { detail::g_grad_enabled = previous_; }

int shape_numel(const std::vector<int>& shape) {
    int n = 1;
    for (int e : shape) {
        if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_to_string(shape));
        n *= e;
    }
    return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor Tensor::wrap(std::shared_ptr<detail::Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
    const int n = shape_numel(shape);
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data.assign(static_cast<size_t>(n), value);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(static_cast<size_t>(n), 0.0);
    return wrap(std::move(node));
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
    const int n = shape_numel(shape);
    if (static_cast<size_t>(n) != data.size())
        throw DimensionError("data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_to_string(shape));
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(static_cast<size_t>(n), 0.0);
    return wrap(std::move(node));
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

const std::vector<int>& Tensor::shape() const {
    if (!node_) throw Error("undefined tensor");
    return node_->shape;
}

int Tensor::dim(int axis) const {
    const auto& s = shape();
    if (axis < 0 || axis >= static_cast<int>(s.size()))
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                             shape_to_string(s));
    return s[static_cast<size_t>(axis)];
}

int Tensor::numel() const {
    if (!node_) throw Error("undefined tensor");
    return node_->numel();
}

std::vector<double>& Tensor::data() {
    if (!node_) throw Error("undefined tensor");
    return node_->data;
}

const std::vector<double>& Tensor::data() const {
    if (!node_) throw Error("undefined tensor");
    return node_->data;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

const std::vector<double>& Tensor::grad() const {
    if (!node_ || !node_->requires_grad)
        throw Error("tensor does not track gradients");
    return node_->grad;
}

double Tensor::item() const {
    if (numel() != 1) throw DimensionError("item() requires a single-element tensor, shape is " +
                                           shape_to_string(shape()));
    return node_->data[0];
}

bool Tensor::all_finite() const {
    if (!node_) return false;
    for (double v : node_->data)
        if (!std::isfinite(v)) return false;
    for (double v : node_->grad)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::zero_grad() {
    if (node_ && node_->requires_grad)
        std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detached_copy(bool requires_grad) const {
    if (!node_) throw Error("undefined tensor");
    return from_data(node_->shape, node_->data, requires_grad);
}

void Tensor::backward() {
    if (!node_) throw Error("undefined tensor");
    if (node_->numel() != 1)
        throw DimensionError("backward() starts from a scalar, shape is " +
                             shape_to_string(node_->shape));
    if (!node_->requires_grad)
        throw Error("backward() on a tensor without gradient tracking");

    // Iterative post-order DFS so deep graphs cannot overflow the stack.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            detail::Node* p = n->parents[next].get();
            ++next;
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->grad.assign(1, 1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* n = *it;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

}  // namespace shapemap
