#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stda/core/kv.hpp"
#include "stda/core/records.hpp"

namespace stda {

struct EvalConfig {
    double iou_threshold = 0.5;
    double link_alpha = 1.0;
    int top_k_error_analysis = 1000;

    void validate() const;
    void write(KeyValues& kv) const;
    static EvalConfig read(const KeyValues& kv);
};

/// All-point interpolated average precision of a ranked list. `is_tp[i]` tells
/// whether the i-th ranked prediction is a true positive; `num_gt` > 0.
double average_precision(const std::vector<bool>& is_tp, int num_gt);

/// VOC frame AP for one class. Detections are ranked by descending score
/// (stable for ties); each takes the ground truth of its video and frame with
/// the highest IoU, and counts as a true positive if that IoU reaches the
/// threshold and the ground truth is still unmatched. Returns nullopt when the
/// class has no ground truth.
std::optional<double> frame_ap(std::span<const Detection> detections, std::span<const GroundTruthInstance> gt,
                               int class_id, double iou_threshold);

/// A tube attached to its video.
struct VideoTube {
    int video_id = 0;
    ActionTube tube;
};

/// Same protocol with iou_3d as overlap and tube_score as ranking score.
std::optional<double> video_ap(std::span<const VideoTube> tubes, std::span<const VideoTube> gt_tubes, int class_id,
                               double iou_threshold);

/// Per-class AP (nullopt where undefined) and their mean over defined classes.
struct MeanAp {
    std::vector<std::optional<double>> per_class;
    double mean = 0.0;
    std::vector<int> excluded;  // classes without ground truth
};

MeanAp mean_ap(const std::vector<std::optional<double>>& per_class);

}  // namespace stda
