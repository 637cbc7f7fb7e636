#include "stda/encoders/discriminators.hpp"

#include <stdexcept>

namespace stda {

SpatialDiscriminator::SpatialDiscriminator(int in_channels, const DiscriminatorConfig& config, nn::Rng& rng)
    : conv0_(in_channels, config.spatial_width, 3, 2, 1, rng),
      conv1_(config.spatial_width, config.spatial_width, 3, 1, 1, rng),
      fc_(config.spatial_width, 1, rng, 0.01) {}

nn::Var SpatialDiscriminator::operator()(const nn::Var& sf_map) const {
    nn::Var x = nn::relu(conv0_(sf_map));
    x = nn::relu(conv1_(x));
    x = fc_(nn::global_avg_pool(x));
    return nn::sigmoid_probability(nn::reshape(x, {x.value().dim(0)}));
}

void SpatialDiscriminator::collect(nn::ParameterSet& into, const std::string& prefix) const {
    conv0_.collect(into, prefix + ".conv0");
    conv1_.collect(into, prefix + ".conv1");
    fc_.collect(into, prefix + ".fc");
}

TemporalImageDiscriminator::TemporalImageDiscriminator(int in_channels, const DiscriminatorConfig& config,
                                                       nn::Rng& rng)
    : conv0_(in_channels, config.temporal_image_width, 1, 1, 0, rng),
      conv1_(config.temporal_image_width, 1, 1, 1, 0, rng, 0.01) {}

nn::Var TemporalImageDiscriminator::operator()(const nn::Var& tf1_map) const {
    nn::Var x = conv1_(nn::relu(conv0_(tf1_map)));
    const auto& s = x.shape();
    return nn::sigmoid_probability(nn::reshape(x, {s[0], s[2], s[3]}));
}

void TemporalImageDiscriminator::collect(nn::ParameterSet& into, const std::string& prefix) const {
    conv0_.collect(into, prefix + ".conv0");
    conv1_.collect(into, prefix + ".conv1");
}

TemporalInstanceDiscriminator::TemporalInstanceDiscriminator(int in_features, const DiscriminatorConfig& config,
                                                             nn::Rng& rng)
    : fc0_(in_features, config.temporal_instance_width, rng), fc1_(config.temporal_instance_width, 1, rng, 0.01) {}

nn::Var TemporalInstanceDiscriminator::operator()(const nn::Var& tf2_vectors) const {
    if (tf2_vectors.value().rank() != 2 || tf2_vectors.value().dim(1) != fc0_.in_features()) {
        throw std::invalid_argument("instance discriminator: expected [R, " + std::to_string(fc0_.in_features()) +
                                    "], got " + nn::shape_string(tf2_vectors.shape()));
    }
    nn::Var x = fc1_(nn::relu(fc0_(tf2_vectors)));
    return nn::sigmoid_probability(nn::reshape(x, {x.value().dim(0)}));
}

void TemporalInstanceDiscriminator::collect(nn::ParameterSet& into, const std::string& prefix) const {
    fc0_.collect(into, prefix + ".fc0");
    fc1_.collect(into, prefix + ".fc1");
}

}  // namespace stda
