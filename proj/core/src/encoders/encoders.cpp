#include "stda/encoders/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stda {

namespace {

// Channel widths ramp up to `final_width`, halving towards the input, floor 8.
std::vector<int> ramp_widths(int layers, int final_width) {
    std::vector<int> w(static_cast<std::size_t>(layers));
    for (int i = 0; i < layers; ++i) {
        w[static_cast<std::size_t>(i)] = std::max(std::min(8, final_width), final_width >> (layers - 1 - i));
    }
    return w;
}

}  // namespace

SpatialEncoder::SpatialEncoder(const EncoderConfig& config, nn::Rng& rng) : config_(config) {
    config_.validate();
    const auto widths = ramp_widths(config_.spatial_layers(), config_.sf_channels);
    int in = config_.in_channels;
    for (int w : widths) {
        layers_.emplace_back(in, w, 3, 2, 1, rng);
        in = w;
    }
}

nn::Var SpatialEncoder::operator()(const nn::Var& keyframes) const {
    if (keyframes.value().rank() != 4 || keyframes.value().dim(1) != config_.in_channels) {
        throw std::invalid_argument("spatial encoder: expected [N, " + std::to_string(config_.in_channels) +
                                    ", H, W] input, got " + nn::shape_string(keyframes.shape()));
    }
    nn::Var x = keyframes;
    for (const auto& layer : layers_) {
        x = nn::relu(layer(x));
    }
    return x;
}

void SpatialEncoder::collect(nn::ParameterSet& into, const std::string& prefix) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].collect(into, prefix + ".conv" + std::to_string(i));
    }
}

TemporalImageEncoder::TemporalImageEncoder(const EncoderConfig& config, nn::Rng& rng) : config_(config) {
    config_.validate();
    const int layers = config_.spatial_layers();
    const int temporal = config_.temporal_layers();
    const auto widths = ramp_widths(layers, config_.tf1_channels);
    int in = config_.in_channels;
    for (int i = 0; i < layers; ++i) {
        // Temporal downsampling happens in the last layers.
        const int st = i >= layers - temporal ? 2 : 1;
        layers_.emplace_back(in, widths[static_cast<std::size_t>(i)], 3, 3, st, 2, rng);
        in = widths[static_cast<std::size_t>(i)];
    }
}

nn::Var TemporalImageEncoder::unflattened(const nn::Var& clips) const {
    const auto& v = clips.value();
    if (v.rank() != 5 || v.dim(1) != config_.in_channels) {
        throw std::invalid_argument("temporal encoder: expected [N, C, T, H, W] input, got " +
                                    nn::shape_string(clips.shape()));
    }
    if (v.dim(2) != config_.clip_length) {
        throw std::invalid_argument("temporal encoder: clip has " + std::to_string(v.dim(2)) +
                                    " frames, configured clip_length is " + std::to_string(config_.clip_length));
    }
    nn::Var x = clips;
    for (const auto& layer : layers_) {
        x = nn::relu(layer(x));
    }
    return x;
}

nn::Var TemporalImageEncoder::operator()(const nn::Var& clips) const { return nn::temporal_mean(unflattened(clips)); }

void TemporalImageEncoder::collect(nn::ParameterSet& into, const std::string& prefix) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].collect(into, prefix + ".conv" + std::to_string(i));
    }
}

nn::Var roi_pool(const nn::Var& tf1_map, std::span<const nn::RoiRef> proposals, const EncoderConfig& config,
                 int image_width, int image_height) {
    std::vector<nn::RoiRef> clipped;
    clipped.reserve(proposals.size());
    for (const nn::RoiRef& roi : proposals) {
        // BoundingBox::clipped throws on zero-area results.
        clipped.push_back({roi.batch_index, roi.box.clipped(image_width, image_height)});
    }
    return nn::roi_align(tf1_map, clipped, config.roi_size, 1.0 / config.spatial_stride);
}

TemporalInstanceEncoder::TemporalInstanceEncoder(const EncoderConfig& config, nn::Rng& rng)
    : config_(config), conv_(config.tf1_channels, config.tf2_channels, 3, 1, 1, rng) {
    config_.validate();
}

nn::Var TemporalInstanceEncoder::operator()(const nn::Var& pooled) const {
    const auto& v = pooled.value();
    if (v.rank() != 4 || v.dim(1) != config_.tf1_channels || v.dim(2) != config_.roi_size ||
        v.dim(3) != config_.roi_size) {
        throw std::invalid_argument("instance encoder: expected [R, " + std::to_string(config_.tf1_channels) + ", " +
                                    std::to_string(config_.roi_size) + ", " + std::to_string(config_.roi_size) +
                                    "], got " + nn::shape_string(pooled.shape()));
    }
    return nn::global_avg_pool(nn::relu(conv_(pooled)));
}

void TemporalInstanceEncoder::collect(nn::ParameterSet& into, const std::string& prefix) const {
    conv_.collect(into, prefix + ".conv0");
}

void GrlConfig::validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw std::invalid_argument("GrlConfig: lambda must be finite and non-negative");
    }
}

GradientReversal::GradientReversal(GrlConfig config) : config_(config) { config_.validate(); }

}  // namespace stda
