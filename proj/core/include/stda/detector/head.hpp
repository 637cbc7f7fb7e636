#pragma once

#include <span>
#include <vector>

#include "stda/core/kv.hpp"
#include "stda/detector/rpn.hpp"
#include "stda/nn/ops.hpp"

namespace stda {

struct HeadConfig {
    int num_classes = 4;  // action classes; logits carry one more for background at index 0
    int rois_per_image = 16;
    double fg_fraction = 0.25;
    double fg_iou = 0.5;
    double score_threshold = 0.01;
    double detection_nms_iou = 0.5;
    int max_detections = 20;

    void validate() const;
    void write(KeyValues& kv) const;
    static HeadConfig read(const KeyValues& kv);

    bool operator==(const HeadConfig&) const = default;
};

/// Regression targets of the second stage use weights (10, 10, 5, 5).
const BoxCoder& head_box_coder();

/// A ground-truth box with its dataset class (0-based, background excluded).
struct LabeledBox {
    BoundingBox box;
    int class_id = 0;
};

struct HeadOutput {
    nn::Var logits;  // [R, C + 1]
    nn::Var deltas;  // [R, 4C], class c at columns 4c..4c+3
};

class DetectionHead {
public:
    DetectionHead(int in_features, int num_classes, nn::Rng& rng);
    HeadOutput operator()(const nn::Var& tf2_vectors) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    nn::Linear cls_, bbox_;
};

/// Second-stage training targets for a batch of ROIs.
struct RoiTargets {
    std::vector<nn::RoiRef> rois;
    std::vector<int> labels;  // 0 background, c + 1 for dataset class c
    std::vector<double> targets;  // 4C per ROI
    std::vector<double> weights;  // 4C per ROI, 1 on the label's slot for foreground
};

/// Sample up to `rois_per_image` ROIs from proposals plus the ground-truth
/// boxes, with at most fg_fraction foreground (IoU >= fg_iou).
void sample_rois(int batch_index, std::span<const Proposal> proposals, std::span<const LabeledBox> gt,
                 const HeadConfig& config, nn::Rng& rng, RoiTargets& out);

struct HeadLosses {
    nn::Var cls;  // mean cross-entropy over C + 1 classes
    nn::Var reg;  // smooth-L1 on foreground deltas, divided by the ROI count
};

HeadLosses detection_loss(const HeadOutput& out, const RoiTargets& targets, int num_classes);

}  // namespace stda
