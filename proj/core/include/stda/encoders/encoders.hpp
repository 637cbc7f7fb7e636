#pragma once

#include <span>
#include <vector>

#include "stda/encoders/config.hpp"
#include "stda/nn/layers.hpp"

namespace stda {

/// SF: 2D conv stack on the keyframe. [N, C, H, W] -> [N, sf_channels, ceil(H/s), ceil(W/s)].
class SpatialEncoder {
public:
    SpatialEncoder(const EncoderConfig& config, nn::Rng& rng);

    nn::Var operator()(const nn::Var& keyframes) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    EncoderConfig config_;
    std::vector<nn::Conv2d> layers_;
};

/// TF1: 3D conv stack with spatial stride `spatial_stride` and temporal stride
/// `temporal_stride`, flattened by a mean over the remaining temporal axis.
/// [N, C, T, H, W] -> [N, tf1_channels, ceil(H/s), ceil(W/s)].
class TemporalImageEncoder {
public:
    TemporalImageEncoder(const EncoderConfig& config, nn::Rng& rng);

    nn::Var operator()(const nn::Var& clips) const;
    /// Activations before temporal flattening: [N, tf1_channels, T/ts, H', W'].
    nn::Var unflattened(const nn::Var& clips) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    EncoderConfig config_;
    std::vector<nn::Conv3d> layers_;
};

/// ROI align of TF1 features. Proposals are given in image coordinates, clipped
/// to the image, and mapped to the feature grid by dividing by the spatial
/// stride. Throws if a proposal has no area left after clipping.
/// Returns [R, tf1_channels, roi_size, roi_size].
nn::Var roi_pool(const nn::Var& tf1_map, std::span<const nn::RoiRef> proposals, const EncoderConfig& config,
                 int image_width, int image_height);

/// TF2: conv + average pool over each pooled ROI. [R, tf1, r, r] -> [R, tf2_channels].
class TemporalInstanceEncoder {
public:
    TemporalInstanceEncoder(const EncoderConfig& config, nn::Rng& rng);

    nn::Var operator()(const nn::Var& pooled) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    EncoderConfig config_;
    nn::Conv2d conv_;
};

struct GrlConfig {
    double lambda = 1.0;
    void validate() const;
};

/// Identity on the forward pass, -lambda * g on the backward pass.
class GradientReversal {
public:
    explicit GradientReversal(GrlConfig config);
    nn::Var operator()(const nn::Var& x) const { return nn::gradient_reversal(x, config_.lambda); }
    double lambda() const { return config_.lambda; }

private:
    GrlConfig config_;
};

}  // namespace stda
