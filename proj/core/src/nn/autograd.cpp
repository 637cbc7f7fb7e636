#include "stda/nn/autograd.hpp"

#include <stdexcept>
#include <unordered_set>

namespace stda::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor& Node::grad_buffer() {
    if (grad.empty() && !value.empty()) {
        grad = Tensor(value.shape(), 0.0);
    }
    return grad;
}

Var Var::constant(Tensor value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    return Var(std::move(node));
}

Var Var::parameter(Tensor value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Var(std::move(node));
}

Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backward) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    if (!g_grad_enabled) {
        return Var(std::move(node));
    }
    for (const Var& in : inputs) {
        if (in.requires_grad()) {
            node->requires_grad = true;
        }
    }
    if (node->requires_grad) {
        node->inputs.reserve(inputs.size());
        for (const Var& in : inputs) {
            node->inputs.push_back(in.shared());
        }
        node->backward = std::move(backward);
    }
    return Var(std::move(node));
}

void backward(const Var& root, double seed) {
    if (!root.defined()) {
        throw std::invalid_argument("backward: undefined root");
    }
    if (root.value().size() != 1) {
        throw std::invalid_argument("backward: root must be a scalar, got shape " + shape_string(root.shape()));
    }
    if (!root.requires_grad()) {
        return;
    }

    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.node(), 0);
    visited.insert(root.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* child = node->inputs[next++].get();
            if (child->requires_grad && visited.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root.node()->grad_buffer()[0] += seed;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backward && !node->grad.empty()) {
            node->backward(*node);
        }
    }
    // Interior gradients are not needed after the pass.
    for (Node* node : order) {
        if (node->backward) {
            node->grad = Tensor();
        }
    }
}

void ParameterSet::add(std::string name, Var parameter) {
    if (contains(name)) {
        throw std::invalid_argument("ParameterSet: duplicate parameter " + name);
    }
    entries_.emplace_back(std::move(name), std::move(parameter));
}

void ParameterSet::append(const std::string& prefix, const ParameterSet& other) {
    for (const auto& [name, var] : other.entries_) {
        add(prefix + name, var);
    }
}

std::vector<Var> ParameterSet::vars() const {
    std::vector<Var> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
        out.push_back(e.second);
    }
    return out;
}

const Var& ParameterSet::at(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.first == name) {
            return e.second;
        }
    }
    throw std::out_of_range("ParameterSet: no parameter named " + name);
}

bool ParameterSet::contains(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.first == name) {
            return true;
        }
    }
    return false;
}

std::size_t ParameterSet::num_scalars() const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
        n += e.second.value().size();
    }
    return n;
}

void ParameterSet::zero_grad() const {
    for (const auto& e : entries_) {
        Var v = e.second;
        v.zero_grad();
    }
}

}  // namespace stda::nn
