#pragma once

#include <vector>

#include "stda/core/geometry.hpp"

namespace stda {

/// A scored, classified box on one frame of one video.
struct Detection {
    int video_id = 0;
    int frame_index = 0;
    BoundingBox box;
    int class_id = 0;
    double score = 0.0;
};

/// One annotated actor box. `instance_id` links the same actor across frames.
struct GroundTruthInstance {
    int video_id = 0;
    int frame_index = 0;
    BoundingBox box;
    int class_id = 0;
    int instance_id = 0;
};

/// Throws std::invalid_argument if score is outside [0,1], frame_index < 0 or class_id < 0.
void validate(const Detection& d);
void validate(const GroundTruthInstance& g, int num_classes);

struct TubeFrame {
    int frame_index = 0;
    BoundingBox box;
    double score = 0.0;
};

/// Temporally contiguous sequence of boxes of one class.
class ActionTube {
public:
    ActionTube() = default;
    /// Throws std::invalid_argument if `frames` is empty or frame indices are not
    /// strictly consecutive.
    ActionTube(int class_id, std::vector<TubeFrame> frames, double tube_score);

    int class_id() const { return class_id_; }
    double tube_score() const { return tube_score_; }
    const std::vector<TubeFrame>& frames() const { return frames_; }
    int first_frame() const { return frames_.front().frame_index; }
    int last_frame() const { return frames_.back().frame_index; }
    int length() const { return static_cast<int>(frames_.size()); }

    /// Box at `frame_index`; the frame must lie within [first_frame, last_frame].
    const BoundingBox& box_at(int frame_index) const;

private:
    int class_id_ = 0;
    std::vector<TubeFrame> frames_;
    double tube_score_ = 0.0;
};

/// Temporal IoU of the frame spans times the mean per-frame iou_2d over the
/// temporal intersection. Classes are not compared.
double iou_3d(const ActionTube& a, const ActionTube& b);

}  // namespace stda
