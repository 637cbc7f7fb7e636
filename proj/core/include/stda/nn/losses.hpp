#pragma once

#include <span>

#include "stda/nn/autograd.hpp"

namespace stda::nn {

/// Sum over rows of -log softmax(logits)[label], divided by `normalizer`.
/// logits [N, K]; an empty batch yields 0.
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels, double normalizer);

/// Sum of weight * smoothL1(pred - target; beta), divided by `normalizer`.
Var smooth_l1(const Var& pred, const Tensor& target, const Tensor& weight, double beta, double normalizer);

/// Sum of weight * BCE(sigmoid(logit), target), computed stably from logits.
Var sigmoid_bce_with_logits(const Var& logits, const Tensor& target, const Tensor& weight);

}  // namespace stda::nn
