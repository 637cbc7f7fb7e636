#pragma once

#include <span>
#include <vector>

#include "stda/core/geometry.hpp"
#include "stda/nn/autograd.hpp"

namespace stda::nn {

Var add(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
/// Sum of all elements as a rank-0 tensor.
Var sum(const Var& a);
Var relu(const Var& a);
/// Logistic sigmoid clamped to [eps, 1 - eps]; the gradient is zero where clamped.
Var sigmoid_probability(const Var& logits, double eps = 1e-7);
Var reshape(const Var& a, Shape shape);

/// y = x W^T + b with x [N, F], W [O, F], b [O].
Var linear(const Var& x, const Var& weight, const Var& bias);

/// x [N, C, H, W], weight [O, C, K, K], bias [O]; square kernel, zero padding.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);

/// x [N, C, T, H, W], weight [O, C, KT, K, K], bias [O].
Var conv3d(const Var& x, const Var& weight, const Var& bias, int stride_t, int stride_s, int pad_t, int pad_s);

/// Mean over the temporal axis: [N, C, T, H, W] -> [N, C, H, W].
Var temporal_mean(const Var& x);

/// [N, C, H, W] -> [N, C].
Var global_avg_pool(const Var& x);

/// Identity forward; backward multiplies the incoming gradient by -lambda.
Var gradient_reversal(const Var& x, double lambda);

/// Gather along the leading axis.
Var select_rows(const Var& x, std::span<const int> rows);

/// Proposal in image coordinates attached to one batch element.
struct RoiRef {
    int batch_index = 0;
    BoundingBox box;
};

/// Bilinear ROI align (half-pixel aligned) on features [N, C, H, W]:
/// returns [R, C, out_size, out_size]. Box coordinates are multiplied by
/// `spatial_scale` to reach feature coordinates; each output bin averages
/// sampling_ratio x sampling_ratio bilinear samples.
Var roi_align(const Var& features, std::span<const RoiRef> rois, int out_size, double spatial_scale,
              int sampling_ratio = 2);

}  // namespace stda::nn
