#pragma once

#include <span>
#include <vector>

#include "stda/core/records.hpp"
#include "stda/evaluation/ap.hpp"

namespace stda {

struct ScoredBox {
    BoundingBox box;
    double score = 0.0;
};

/// Highest-value path taking one box per frame, with value
///   sum_t score(b_t) + alpha * sum_t iou_2d(b_t, b_{t+1}).
/// Ties keep the lower box index. Empty if any frame has no box.
struct LinkedPath {
    std::vector<int> boxes;  // index into each frame's list
    double value = 0.0;
};

LinkedPath best_path(const std::vector<std::vector<ScoredBox>>& frames, double alpha);

/// Path value accumulated in the same order as best_path:
///   V_0 = s_0, V_t = (V_{t-1} + alpha * iou_t) + s_t.
double path_value(const std::vector<std::vector<ScoredBox>>& frames, std::span<const int> path, double alpha);

/// Repeatedly extracts the best path, removes its boxes, and stops once some
/// frame has run out. `frames[t]` holds the detections on frame first_frame + t.
/// Tube score is the mean box score along the path.
std::vector<ActionTube> link_tubes(std::vector<std::vector<ScoredBox>> frames, int first_frame, int class_id,
                                   double alpha);

/// Links the detections of every (video, class) over the video's frame span.
/// `frame_spans[v]` = {first, last} frame of video v; videos absent there use
/// the span of their detections.
std::vector<VideoTube> link_detections(std::span<const Detection> detections, int num_classes, double alpha,
                                       const std::vector<std::pair<int, std::pair<int, int>>>& frame_spans = {});

/// Ground-truth tubes: annotations grouped by (video, instance, class), split
/// wherever frames are not consecutive; box scores are 1.
std::vector<VideoTube> ground_truth_tubes(std::span<const GroundTruthInstance> gt);

}  // namespace stda
