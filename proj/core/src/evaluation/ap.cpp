#include "stda/evaluation/ap.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace stda {

void EvalConfig::validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw std::invalid_argument("iou_threshold must be in (0, 1)");
    }
    if (!(link_alpha >= 0.0)) {
        throw std::invalid_argument("link_alpha must be non-negative");
    }
    if (top_k_error_analysis <= 0) {
        throw std::invalid_argument("top_k_error_analysis must be positive");
    }
}

void EvalConfig::write(KeyValues& kv) const {
    kv.set("eval.iou_threshold", iou_threshold);
    kv.set("eval.link_alpha", link_alpha);
    kv.set("eval.top_k_error_analysis", top_k_error_analysis);
}

EvalConfig EvalConfig::read(const KeyValues& kv) {
    EvalConfig c;
    c.iou_threshold = kv.get_double("eval.iou_threshold", c.iou_threshold);
    c.link_alpha = kv.get_double("eval.link_alpha", c.link_alpha);
    c.top_k_error_analysis = static_cast<int>(kv.get_int("eval.top_k_error_analysis", c.top_k_error_analysis));
    c.validate();
    return c;
}

double average_precision(const std::vector<bool>& is_tp, int num_gt) {
    if (num_gt <= 0) {
        throw std::invalid_argument("average_precision: num_gt must be positive");
    }
    const std::size_t n = is_tp.size();
    std::vector<double> precision(n), recall(n);
    int tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tp += is_tp[i] ? 1 : 0;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / num_gt;
    }
    // Precision envelope, right to left.
    for (std::size_t i = n; i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (recall[i] > prev_recall) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    return ap;
}

namespace {

template <typename Pred, typename Truth, typename ScoreFn, typename OverlapFn, typename SameUnitFn>
std::optional<double> ranked_ap(std::span<const Pred> preds, std::span<const Truth> truths, ScoreFn score,
                                OverlapFn overlap, SameUnitFn same_unit, double iou_threshold) {
    if (truths.empty()) {
        return std::nullopt;
    }
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score(preds[a]) > score(preds[b]); });
    std::vector<bool> used(truths.size(), false);
    std::vector<bool> is_tp(preds.size(), false);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const Pred& p = preds[order[rank]];
        double best = -1.0;
        std::size_t best_g = truths.size();
        for (std::size_t g = 0; g < truths.size(); ++g) {
            if (!same_unit(p, truths[g])) {
                continue;
            }
            const double o = overlap(p, truths[g]);
            if (o > best) {
                best = o;
                best_g = g;
            }
        }
        if (best_g < truths.size() && best >= iou_threshold && !used[best_g]) {
            used[best_g] = true;
            is_tp[rank] = true;
        }
    }
    return average_precision(is_tp, static_cast<int>(truths.size()));
}

}  // namespace

std::optional<double> frame_ap(std::span<const Detection> detections, std::span<const GroundTruthInstance> gt,
                               int class_id, double iou_threshold) {
    std::vector<Detection> preds;
    for (const auto& d : detections) {
        if (d.class_id == class_id) {
            preds.push_back(d);
        }
    }
    std::vector<GroundTruthInstance> truths;
    for (const auto& g : gt) {
        if (g.class_id == class_id) {
            truths.push_back(g);
        }
    }
    return ranked_ap<Detection, GroundTruthInstance>(
        preds, truths, [](const Detection& d) { return d.score; },
        [](const Detection& d, const GroundTruthInstance& g) { return iou_2d(d.box, g.box); },
        [](const Detection& d, const GroundTruthInstance& g) {
            return d.video_id == g.video_id && d.frame_index == g.frame_index;
        },
        iou_threshold);
}

std::optional<double> video_ap(std::span<const VideoTube> tubes, std::span<const VideoTube> gt_tubes, int class_id,
                               double iou_threshold) {
    std::vector<VideoTube> preds, truths;
    for (const auto& t : tubes) {
        if (t.tube.class_id() == class_id) {
            preds.push_back(t);
        }
    }
    for (const auto& t : gt_tubes) {
        if (t.tube.class_id() == class_id) {
            truths.push_back(t);
        }
    }
    return ranked_ap<VideoTube, VideoTube>(
        preds, truths, [](const VideoTube& t) { return t.tube.tube_score(); },
        [](const VideoTube& a, const VideoTube& b) { return iou_3d(a.tube, b.tube); },
        [](const VideoTube& a, const VideoTube& b) { return a.video_id == b.video_id; }, iou_threshold);
}

MeanAp mean_ap(const std::vector<std::optional<double>>& per_class) {
    MeanAp out;
    out.per_class = per_class;
    double sum = 0.0;
    int defined = 0;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        if (per_class[c]) {
            sum += *per_class[c];
            ++defined;
        } else {
            out.excluded.push_back(static_cast<int>(c));
        }
    }
    out.mean = defined > 0 ? sum / defined : 0.0;
    return out;
}

}  // namespace stda
