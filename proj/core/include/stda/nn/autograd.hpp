#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stda/nn/tensor.hpp"

namespace stda::nn {

/// A vertex of the reverse-mode tape. Operations hold strong references to
/// their inputs only, so dropping the root of a graph frees it.
struct Node {
    Tensor value;
    Tensor grad;  // empty until something flows into it
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward;

    /// Gradient buffer, zero-initialized on first use.
    Tensor& grad_buffer();
};

class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    static Var constant(Tensor value);
    static Var parameter(Tensor value);

    bool defined() const { return static_cast<bool>(node_); }
    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    bool requires_grad() const { return node_->requires_grad; }
    const Shape& shape() const { return node_->value.shape(); }
    double item() const { return node_->value.item(); }

    /// Drops the accumulated gradient (the next backward pass allocates afresh).
    void zero_grad() { node_->grad = Tensor(); }

    Node* node() const { return node_.get(); }
    const std::shared_ptr<Node>& shared() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

/// Whether operations on this thread record backward closures.
bool grad_enabled();

/// Disables tape recording on the current thread for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Create an operation result. The backward closure is kept only if some input
/// requires a gradient; it reads `self.grad` and accumulates into
/// `self.inputs[i]->grad_buffer()` for inputs that require it.
Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backward);

/// Reverse pass from a scalar root, seeding d(root)/d(root) = seed.
void backward(const Var& root, double seed = 1.0);

/// Ordered, named collection of trainable leaves.
class ParameterSet {
public:
    void add(std::string name, Var parameter);
    void append(const std::string& prefix, const ParameterSet& other);

    const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
    std::vector<Var> vars() const;
    const Var& at(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::size_t size() const { return entries_.size(); }
    std::size_t num_scalars() const;

    void zero_grad() const;

private:
    std::vector<std::pair<std::string, Var>> entries_;
};

}  // namespace stda::nn
