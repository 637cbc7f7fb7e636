#include "stda/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stda::nn {

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels, double normalizer) {
    if (logits.value().rank() != 2) {
        throw std::invalid_argument("softmax_cross_entropy: logits must be [N, K]");
    }
    const int n = logits.value().dim(0);
    const int k = logits.value().dim(1);
    if (static_cast<int>(labels.size()) != n) {
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
    }
    if (!(normalizer > 0.0)) {
        throw std::invalid_argument("softmax_cross_entropy: normalizer must be positive");
    }
    std::vector<int> lab(labels.begin(), labels.end());
    auto probs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * k);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (lab[i] < 0 || lab[i] >= k) {
            throw std::out_of_range("softmax_cross_entropy: label out of range");
        }
        const double* z = logits.value().data() + static_cast<std::ptrdiff_t>(i) * k;
        const double zmax = *std::max_element(z, z + k);
        double denom = 0.0;
        for (int j = 0; j < k; ++j) {
            denom += std::exp(z[j] - zmax);
        }
        const double log_denom = std::log(denom);
        for (int j = 0; j < k; ++j) {
            (*probs)[static_cast<std::size_t>(i) * k + j] = std::exp(z[j] - zmax - log_denom);
        }
        total += -(z[lab[i]] - zmax - log_denom);
    }
    return make_op(Tensor::scalar(total / normalizer), {logits}, [probs, lab, n, k, normalizer](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        const double g = self.grad[0] / normalizer;
        Tensor& gx = in.grad_buffer();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < k; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * k + j;
                gx[idx] += g * ((*probs)[idx] - (j == lab[i] ? 1.0 : 0.0));
            }
        }
    });
}

Var smooth_l1(const Var& pred, const Tensor& target, const Tensor& weight, double beta, double normalizer) {
    if (pred.shape() != target.shape() || pred.shape() != weight.shape()) {
        throw std::invalid_argument("smooth_l1: shape mismatch");
    }
    if (!(beta > 0.0) || !(normalizer > 0.0)) {
        throw std::invalid_argument("smooth_l1: beta and normalizer must be positive");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (weight[i] == 0.0) {
            continue;
        }
        const double d = std::abs(pred.value()[i] - target[i]);
        total += weight[i] * (d < beta ? 0.5 * d * d / beta : d - 0.5 * beta);
    }
    return make_op(Tensor::scalar(total / normalizer), {pred}, [target, weight, beta, normalizer](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        const double g = self.grad[0] / normalizer;
        Tensor& gx = in.grad_buffer();
        for (std::size_t i = 0; i < target.size(); ++i) {
            if (weight[i] == 0.0) {
                continue;
            }
            const double d = in.value[i] - target[i];
            const double dd = std::abs(d) < beta ? d / beta : (d > 0.0 ? 1.0 : -1.0);
            gx[i] += g * weight[i] * dd;
        }
    });
}

Var sigmoid_bce_with_logits(const Var& logits, const Tensor& target, const Tensor& weight) {
    if (logits.shape() != target.shape() || logits.shape() != weight.shape()) {
        throw std::invalid_argument("sigmoid_bce_with_logits: shape mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (weight[i] == 0.0) {
            continue;
        }
        const double z = logits.value()[i];
        // max(z,0) - z*y + log(1 + exp(-|z|))
        total += weight[i] * (std::max(z, 0.0) - z * target[i] + std::log1p(std::exp(-std::abs(z))));
    }
    return make_op(Tensor::scalar(total), {logits}, [target, weight](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        const double g = self.grad[0];
        Tensor& gx = in.grad_buffer();
        for (std::size_t i = 0; i < target.size(); ++i) {
            if (weight[i] == 0.0) {
                continue;
            }
            const double z = in.value[i];
            const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            gx[i] += g * weight[i] * (s - target[i]);
        }
    });
}

}  // namespace stda::nn
