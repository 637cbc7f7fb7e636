#pragma once

#include "stda/core/kv.hpp"

namespace stda {

/// Shape and stride contract shared by the spatial and temporal feature
/// extractors. Both SF and TF1 downsample space by `spatial_stride`, so
/// proposals computed on SF(K) index TF1(V) directly.
struct EncoderConfig {
    int in_channels = 3;
    int spatial_stride = 16;
    int temporal_stride = 4;
    int clip_length = 8;
    int sf_channels = 16;
    int tf1_channels = 32;
    int tf2_channels = 64;
    int roi_size = 7;

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    /// 64x64 inputs: stride 8, 4x4 ROI grid.
    static EncoderConfig desk();

    int spatial_layers() const;
    int temporal_layers() const;
    int feature_size(int image_size) const;
    /// Temporal length of TF1 activations just before flattening.
    int temporal_feature_length() const;

    void write(KeyValues& kv) const;
    /// Keys absent from `kv` take their value from `defaults`.
    static EncoderConfig read(const KeyValues& kv, const EncoderConfig& defaults);

    bool operator==(const EncoderConfig&) const = default;
};

/// Hidden widths of the three domain classifiers.
struct DiscriminatorConfig {
    int spatial_width = 16;
    int temporal_image_width = 16;
    int temporal_instance_width = 32;

    void validate() const;
    void write(KeyValues& kv) const;
    static DiscriminatorConfig read(const KeyValues& kv);

    bool operator==(const DiscriminatorConfig&) const = default;
};

}  // namespace stda
