#pragma once

#include <span>
#include <unordered_map>

#include "stda/nn/autograd.hpp"

namespace stda::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam. Parameters without an accumulated gradient are skipped entirely
/// (their moments and values stay untouched).
class Adam {
public:
    explicit Adam(AdamConfig config) : config_(config) {}

    void step(std::span<const Var> parameters);
    void set_learning_rate(double lr) { config_.learning_rate = lr; }
    const AdamConfig& config() const { return config_; }

private:
    struct Moments {
        Tensor m;
        Tensor v;
        long steps = 0;
    };
    AdamConfig config_;
    std::unordered_map<const Node*, Moments> state_;
};

}  // namespace stda::nn
