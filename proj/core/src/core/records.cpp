#include "stda/core/records.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace stda {

void validate(const Detection& d) {
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw std::invalid_argument("Detection: score outside [0,1]: " + std::to_string(d.score));
    }
    if (d.frame_index < 0) {
        throw std::invalid_argument("Detection: negative frame index");
    }
    if (d.class_id < 0) {
        throw std::invalid_argument("Detection: negative class id");
    }
}

void validate(const GroundTruthInstance& g, int num_classes) {
    if (g.class_id < 0 || g.class_id >= num_classes) {
        throw std::invalid_argument("GroundTruthInstance: class id " + std::to_string(g.class_id) +
                                    " not in label map of size " + std::to_string(num_classes));
    }
    if (g.frame_index < 0) {
        throw std::invalid_argument("GroundTruthInstance: negative frame index");
    }
}

ActionTube::ActionTube(int class_id, std::vector<TubeFrame> frames, double tube_score)
    : class_id_(class_id), frames_(std::move(frames)), tube_score_(tube_score) {
    if (frames_.empty()) {
        throw std::invalid_argument("ActionTube: empty tube");
    }
    for (std::size_t i = 1; i < frames_.size(); ++i) {
        if (frames_[i].frame_index != frames_[i - 1].frame_index + 1) {
            throw std::invalid_argument("ActionTube: frame indices are not consecutive");
        }
    }
}

const BoundingBox& ActionTube::box_at(int frame_index) const {
    if (frame_index < first_frame() || frame_index > last_frame()) {
        throw std::out_of_range("ActionTube::box_at: frame outside tube span");
    }
    return frames_[static_cast<std::size_t>(frame_index - first_frame())].box;
}

double iou_3d(const ActionTube& a, const ActionTube& b) {
    const int lo = std::max(a.first_frame(), b.first_frame());
    const int hi = std::min(a.last_frame(), b.last_frame());
    if (lo > hi) {
        return 0.0;
    }
    const int overlap = hi - lo + 1;
    const int span = std::max(a.last_frame(), b.last_frame()) - std::min(a.first_frame(), b.first_frame()) + 1;
    const double temporal = static_cast<double>(overlap) / static_cast<double>(span);

    double spatial = 0.0;
    for (int f = lo; f <= hi; ++f) {
        spatial += iou_2d(a.box_at(f), b.box_at(f));
    }
    return temporal * (spatial / overlap);
}

}  // namespace stda
