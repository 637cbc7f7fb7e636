#pragma once

#include <span>
#include <vector>

#include "stda/core/records.hpp"
#include "stda/detector/head.hpp"
#include "stda/encoders/discriminators.hpp"
#include "stda/encoders/encoders.hpp"

namespace stda {

/// Everything needed to rebuild a model with identical parameter shapes.
struct ModelConfig {
    int image_size = 64;
    int rpn_hidden = 32;
    EncoderConfig encoder = EncoderConfig::desk();
    AnchorConfig anchors;
    HeadConfig head;
    DiscriminatorConfig discriminators;

    void validate() const;
    void write(KeyValues& kv) const;
    static ModelConfig read(const KeyValues& kv);

    bool operator==(const ModelConfig&) const = default;
};

/// The clip's middle frame: [N, C, T, H, W] -> [N, C, H, W] at index T / 2.
nn::Tensor keyframes_of(const nn::Tensor& clips);

struct DetectionLosses {
    double l_rpn = 0.0;
    double l_cls = 0.0;
    double l_reg = 0.0;
    double l_act = 0.0;
};

/// Two-backbone detector: RPN proposals from SF(keyframe) select ROIs on
/// TF1(clip), which TF2 turns into instance vectors for classification.
class ActionLocalizer {
public:
    ActionLocalizer(const ModelConfig& config, nn::Rng& rng);

    const ModelConfig& config() const { return config_; }
    const std::vector<BoundingBox>& anchors() const { return anchors_; }

    nn::Var spatial_features(const nn::Var& keyframes) const { return sf_(keyframes); }
    nn::Var temporal_features(const nn::Var& clips) const { return tf1_(clips); }
    RpnOutput rpn(const nn::Var& sf_map) const { return rpn_(sf_map); }
    std::vector<std::vector<Proposal>> proposals(const RpnOutput& rpn_out, bool training) const;
    /// ROI-pool TF1 and encode every ROI into a TF2 vector: [R, tf2_channels].
    nn::Var instance_features(const nn::Var& tf1_map, std::span<const nn::RoiRef> rois) const;
    HeadOutput head(const nn::Var& tf2_vectors) const { return head_(tf2_vectors); }

    /// Keyframe detections for each clip of a [N, C, T, H, W] batch. Frame and
    /// video fields are left at zero for the caller to fill in.
    std::vector<std::vector<Detection>> detect(const nn::Tensor& clips) const;

    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    ModelConfig config_;
    SpatialEncoder sf_;
    RegionProposalNetwork rpn_;
    TemporalImageEncoder tf1_;
    TemporalInstanceEncoder tf2_;
    DetectionHead head_;
    std::vector<BoundingBox> anchors_;
};

/// Per-class detection post-processing of head outputs for one image's ROIs.
std::vector<Detection> postprocess_detections(const HeadOutput& out, std::span<const BoundingBox> rois,
                                              const HeadConfig& config, int image_width, int image_height);

}  // namespace stda
