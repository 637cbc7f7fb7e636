#include "stda/nn/optim.hpp"

#include <cmath>

namespace stda::nn {

void Adam::step(std::span<const Var> parameters) {
    for (const Var& p : parameters) {
        if (!p.has_grad()) {
            continue;
        }
        Moments& s = state_[p.node()];
        if (s.m.empty()) {
            s.m = Tensor(p.shape(), 0.0);
            s.v = Tensor(p.shape(), 0.0);
        }
        ++s.steps;
        const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(s.steps));
        const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(s.steps));
        Tensor& value = p.node()->value;
        const Tensor& g = p.grad();
        for (std::size_t i = 0; i < value.size(); ++i) {
            s.m[i] = config_.beta1 * s.m[i] + (1.0 - config_.beta1) * g[i];
            s.v[i] = config_.beta2 * s.v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = s.m[i] / bc1;
            const double vhat = s.v[i] / bc2;
            value[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

}  // namespace stda::nn
