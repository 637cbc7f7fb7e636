#include "stda/evaluation/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

namespace stda {

ErrorType classify_detection(const Detection& d, std::span<const GroundTruthInstance> gt) {
    double best = 0.0;
    const GroundTruthInstance* match = nullptr;
    for (const auto& g : gt) {
        if (g.video_id != d.video_id || g.frame_index != d.frame_index) {
            continue;
        }
        const double iou = iou_2d(d.box, g.box);
        if (iou > best) {
            best = iou;
            match = &g;
        }
    }
    if (match == nullptr) {
        return ErrorType::background;
    }
    if (match->class_id != d.class_id) {
        return ErrorType::incorrect;
    }
    if (best >= 0.5) {
        return ErrorType::correct;
    }
    return best >= 0.3 ? ErrorType::mislocalized : ErrorType::background;
}

ErrorBreakdown error_analysis(std::span<const Detection> detections, std::span<const GroundTruthInstance> gt,
                              int top_k) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; });
    if (top_k >= 0 && order.size() > static_cast<std::size_t>(top_k)) {
        order.resize(static_cast<std::size_t>(top_k));
    }
    std::map<std::pair<int, int>, std::vector<GroundTruthInstance>> by_frame;
    for (const auto& g : gt) {
        by_frame[{g.video_id, g.frame_index}].push_back(g);
    }
    ErrorBreakdown out;
    out.analyzed = static_cast<int>(order.size());
    if (order.empty()) {
        return out;
    }
    int counts[4] = {0, 0, 0, 0};
    for (std::size_t idx : order) {
        const Detection& d = detections[idx];
        const auto it = by_frame.find({d.video_id, d.frame_index});
        const ErrorType t = it == by_frame.end() ? ErrorType::background : classify_detection(d, it->second);
        ++counts[static_cast<int>(t)];
    }
    const double n = static_cast<double>(order.size());
    out.correct = counts[0] / n;
    out.mislocalized = counts[1] / n;
    out.background = counts[2] / n;
    out.incorrect = counts[3] / n;
    return out;
}

}  // namespace stda
