#pragma once

#include <span>
#include <vector>

#include "stda/core/geometry.hpp"
#include "stda/core/kv.hpp"

namespace stda {

struct AnchorConfig {
    std::vector<double> scales{12.0, 18.0, 24.0};  // anchor side in pixels (sqrt of area)
    std::vector<double> aspect_ratios{1.0};       // height / width
    double rpn_positive_iou = 0.7;
    double rpn_negative_iou = 0.3;
    int pre_nms_top_n = 64;
    int post_nms_top_n_train = 16;
    int post_nms_top_n_test = 16;
    double nms_iou = 0.7;
    double min_size = 1.0;

    void validate() const;
    int anchors_per_location() const { return static_cast<int>(scales.size() * aspect_ratios.size()); }

    void write(KeyValues& kv) const;
    static AnchorConfig read(const KeyValues& kv);

    bool operator==(const AnchorConfig&) const = default;
};

/// Anchors for a feat_h x feat_w grid, centered at ((x + 0.5) * stride, (y + 0.5) * stride).
/// Index order is (a, y, x), matching an [A, H', W'] objectness map.
std::vector<BoundingBox> generate_anchors(const AnchorConfig& config, int feat_h, int feat_w, int stride);

/// Greedy non-maximum suppression. Returns indices of kept boxes in descending
/// score order; ties keep the lower index first. No two kept boxes overlap by
/// more than `iou_threshold`.
std::vector<int> nms(std::span<const BoundingBox> boxes, std::span<const double> scores, double iou_threshold,
                     int max_keep = -1);

struct AnchorMatch {
    std::vector<int> labels;      // 1 positive, 0 negative, -1 ignored
    std::vector<int> matched_gt;  // index into gt for every anchor, -1 if there is no ground truth
};

/// IoU-threshold matching; additionally every ground truth box marks its
/// highest-IoU anchors (ties included) positive.
AnchorMatch match_anchors(std::span<const BoundingBox> anchors, std::span<const BoundingBox> gt,
                          const AnchorConfig& config);

}  // namespace stda
