#include "stda/encoders/config.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace stda {

namespace {

bool power_of_two(int v) { return v > 0 && std::has_single_bit(static_cast<unsigned>(v)); }

int log2i(int v) { return std::countr_zero(static_cast<unsigned>(v)); }

}  // namespace

void EncoderConfig::validate() const {
    if (in_channels <= 0 || sf_channels <= 0 || tf1_channels <= 0 || tf2_channels <= 0) {
        throw std::invalid_argument("EncoderConfig: channel counts must be positive");
    }
    if (!power_of_two(spatial_stride) || spatial_stride < 2) {
        throw std::invalid_argument("EncoderConfig: spatial_stride must be a power of two >= 2, got " +
                                    std::to_string(spatial_stride));
    }
    if (!power_of_two(temporal_stride)) {
        throw std::invalid_argument("EncoderConfig: temporal_stride must be a power of two, got " +
                                    std::to_string(temporal_stride));
    }
    if (temporal_stride > spatial_stride) {
        throw std::invalid_argument("EncoderConfig: temporal_stride may not exceed spatial_stride");
    }
    if (clip_length <= 0 || clip_length % temporal_stride != 0) {
        throw std::invalid_argument("EncoderConfig: clip_length " + std::to_string(clip_length) +
                                    " is not divisible by temporal_stride " + std::to_string(temporal_stride));
    }
    if (roi_size <= 0) {
        throw std::invalid_argument("EncoderConfig: roi_size must be positive");
    }
}

EncoderConfig EncoderConfig::desk() {
    EncoderConfig c;
    c.spatial_stride = 8;
    c.roi_size = 4;
    return c;
}

int EncoderConfig::spatial_layers() const { return log2i(spatial_stride); }
int EncoderConfig::temporal_layers() const { return log2i(temporal_stride); }

int EncoderConfig::feature_size(int image_size) const { return (image_size + spatial_stride - 1) / spatial_stride; }

int EncoderConfig::temporal_feature_length() const { return (clip_length + temporal_stride - 1) / temporal_stride; }

void EncoderConfig::write(KeyValues& kv) const {
    kv.set("encoder.in_channels", in_channels);
    kv.set("encoder.spatial_stride", spatial_stride);
    kv.set("encoder.temporal_stride", temporal_stride);
    kv.set("encoder.clip_length", clip_length);
    kv.set("encoder.sf_channels", sf_channels);
    kv.set("encoder.tf1_channels", tf1_channels);
    kv.set("encoder.tf2_channels", tf2_channels);
    kv.set("encoder.roi_size", roi_size);
}

EncoderConfig EncoderConfig::read(const KeyValues& kv, const EncoderConfig& d) {
    EncoderConfig c;
    c.in_channels = static_cast<int>(kv.get_int("encoder.in_channels", d.in_channels));
    c.spatial_stride = static_cast<int>(kv.get_int("encoder.spatial_stride", d.spatial_stride));
    c.temporal_stride = static_cast<int>(kv.get_int("encoder.temporal_stride", d.temporal_stride));
    c.clip_length = static_cast<int>(kv.get_int("encoder.clip_length", d.clip_length));
    c.sf_channels = static_cast<int>(kv.get_int("encoder.sf_channels", d.sf_channels));
    c.tf1_channels = static_cast<int>(kv.get_int("encoder.tf1_channels", d.tf1_channels));
    c.tf2_channels = static_cast<int>(kv.get_int("encoder.tf2_channels", d.tf2_channels));
    c.roi_size = static_cast<int>(kv.get_int("encoder.roi_size", d.roi_size));
    c.validate();
    return c;
}

void DiscriminatorConfig::validate() const {
    if (spatial_width <= 0 || temporal_image_width <= 0 || temporal_instance_width <= 0) {
        throw std::invalid_argument("DiscriminatorConfig: widths must be positive");
    }
}

void DiscriminatorConfig::write(KeyValues& kv) const {
    kv.set("disc.spatial_width", spatial_width);
    kv.set("disc.temporal_image_width", temporal_image_width);
    kv.set("disc.temporal_instance_width", temporal_instance_width);
}

DiscriminatorConfig DiscriminatorConfig::read(const KeyValues& kv) {
    DiscriminatorConfig d;
    d.spatial_width = static_cast<int>(kv.get_int("disc.spatial_width", d.spatial_width));
    d.temporal_image_width = static_cast<int>(kv.get_int("disc.temporal_image_width", d.temporal_image_width));
    d.temporal_instance_width =
        static_cast<int>(kv.get_int("disc.temporal_instance_width", d.temporal_instance_width));
    d.validate();
    return d;
}

}  // namespace stda
