#pragma once

#include "stda/encoders/config.hpp"
#include "stda/nn/layers.hpp"

namespace stda {

/// D_S: strided conv stack, global pool, sigmoid. [N, sf, H', W'] -> [N]
/// probabilities that each keyframe comes from the target domain.
class SpatialDiscriminator {
public:
    SpatialDiscriminator(int in_channels, const DiscriminatorConfig& config, nn::Rng& rng);
    nn::Var operator()(const nn::Var& sf_map) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    nn::Conv2d conv0_, conv1_;
    nn::Linear fc_;
};

/// D_Timg: 1x1 conv stack with a per-location sigmoid. [N, tf1, H', W'] -> [N, H', W'].
class TemporalImageDiscriminator {
public:
    TemporalImageDiscriminator(int in_channels, const DiscriminatorConfig& config, nn::Rng& rng);
    nn::Var operator()(const nn::Var& tf1_map) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    nn::Conv2d conv0_, conv1_;
};

/// D_Tinst: two-layer MLP with sigmoid. [R, tf2] -> [R].
class TemporalInstanceDiscriminator {
public:
    TemporalInstanceDiscriminator(int in_features, const DiscriminatorConfig& config, nn::Rng& rng);
    nn::Var operator()(const nn::Var& tf2_vectors) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    nn::Linear fc0_, fc1_;
};

}  // namespace stda
