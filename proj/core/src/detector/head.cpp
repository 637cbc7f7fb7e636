#include "stda/detector/head.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stda/nn/losses.hpp"

namespace stda {

void HeadConfig::validate() const {
    if (num_classes <= 0) {
        throw std::invalid_argument("HeadConfig: num_classes must be positive");
    }
    if (rois_per_image <= 0) {
        throw std::invalid_argument("HeadConfig: rois_per_image must be positive");
    }
    if (!(fg_fraction > 0.0 && fg_fraction <= 1.0)) {
        throw std::invalid_argument("HeadConfig: fg_fraction must be in (0, 1]");
    }
    if (!(fg_iou > 0.0 && fg_iou <= 1.0)) {
        throw std::invalid_argument("HeadConfig: fg_iou must be in (0, 1]");
    }
    if (!(score_threshold >= 0.0 && score_threshold < 1.0) || max_detections <= 0) {
        throw std::invalid_argument("HeadConfig: invalid detection filtering parameters");
    }
}

void HeadConfig::write(KeyValues& kv) const {
    kv.set("head.num_classes", num_classes);
    kv.set("head.rois_per_image", rois_per_image);
    kv.set("head.fg_fraction", fg_fraction);
    kv.set("head.fg_iou", fg_iou);
    kv.set("head.score_threshold", score_threshold);
    kv.set("head.detection_nms_iou", detection_nms_iou);
    kv.set("head.max_detections", max_detections);
}

HeadConfig HeadConfig::read(const KeyValues& kv) {
    HeadConfig c;
    c.num_classes = static_cast<int>(kv.get_int("head.num_classes", c.num_classes));
    c.rois_per_image = static_cast<int>(kv.get_int("head.rois_per_image", c.rois_per_image));
    c.fg_fraction = kv.get_double("head.fg_fraction", c.fg_fraction);
    c.fg_iou = kv.get_double("head.fg_iou", c.fg_iou);
    c.score_threshold = kv.get_double("head.score_threshold", c.score_threshold);
    c.detection_nms_iou = kv.get_double("head.detection_nms_iou", c.detection_nms_iou);
    c.max_detections = static_cast<int>(kv.get_int("head.max_detections", c.max_detections));
    c.validate();
    return c;
}

const BoxCoder& head_box_coder() {
    static const BoxCoder coder({10.0, 10.0, 5.0, 5.0});
    return coder;
}

DetectionHead::DetectionHead(int in_features, int num_classes, nn::Rng& rng)
    : cls_(in_features, num_classes + 1, rng, 0.01), bbox_(in_features, 4 * num_classes, rng, 0.001) {}

HeadOutput DetectionHead::operator()(const nn::Var& tf2_vectors) const { return {cls_(tf2_vectors), bbox_(tf2_vectors)}; }

void DetectionHead::collect(nn::ParameterSet& into, const std::string& prefix) const {
    cls_.collect(into, prefix + ".cls");
    bbox_.collect(into, prefix + ".bbox");
}

void sample_rois(int batch_index, std::span<const Proposal> proposals, std::span<const LabeledBox> gt,
                 const HeadConfig& config, nn::Rng& rng, RoiTargets& out) {
    std::vector<BoundingBox> candidates;
    candidates.reserve(proposals.size() + gt.size());
    for (const auto& p : proposals) {
        candidates.push_back(p.box);
    }
    for (const auto& g : gt) {
        candidates.push_back(g.box);
    }

    std::vector<int> fg, bg;
    std::vector<int> match(candidates.size(), -1);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double best = 0.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            const double iou = iou_2d(candidates[i], gt[g].box);
            if (iou > best) {
                best = iou;
                match[i] = static_cast<int>(g);
            }
        }
        (best >= config.fg_iou ? fg : bg).push_back(static_cast<int>(i));
    }

    auto take = [&rng](std::vector<int>& pool, int count) {
        count = std::min<int>(count, static_cast<int>(pool.size()));
        for (int i = 0; i < count; ++i) {
            std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
        }
        pool.resize(static_cast<std::size_t>(count));
    };
    const int fg_quota = static_cast<int>(std::lround(config.fg_fraction * config.rois_per_image));
    take(fg, fg_quota);
    take(bg, config.rois_per_image - static_cast<int>(fg.size()));

    const int c = config.num_classes;
    const BoxCoder& coder = head_box_coder();
    auto emit = [&](int idx, bool foreground) {
        out.rois.push_back({batch_index, candidates[static_cast<std::size_t>(idx)]});
        const std::size_t base = out.targets.size();
        out.targets.resize(base + 4 * static_cast<std::size_t>(c), 0.0);
        out.weights.resize(base + 4 * static_cast<std::size_t>(c), 0.0);
        if (!foreground) {
            out.labels.push_back(0);
            return;
        }
        const LabeledBox& g = gt[static_cast<std::size_t>(match[static_cast<std::size_t>(idx)])];
        out.labels.push_back(g.class_id + 1);
        const auto delta = coder.encode(candidates[static_cast<std::size_t>(idx)], g.box);
        for (int k = 0; k < 4; ++k) {
            out.targets[base + 4 * static_cast<std::size_t>(g.class_id) + k] = delta[static_cast<std::size_t>(k)];
            out.weights[base + 4 * static_cast<std::size_t>(g.class_id) + k] = 1.0;
        }
    };
    for (int idx : fg) {
        emit(idx, true);
    }
    for (int idx : bg) {
        emit(idx, false);
    }
}

HeadLosses detection_loss(const HeadOutput& out, const RoiTargets& targets, int num_classes) {
    const int r = static_cast<int>(targets.labels.size());
    if (out.logits.value().dim(0) != r || out.logits.value().dim(1) != num_classes + 1) {
        throw std::invalid_argument("detection_loss: logits shape does not match targets");
    }
    if (r == 0) {
        return {nn::Var::constant(nn::Tensor::scalar(0.0)), nn::Var::constant(nn::Tensor::scalar(0.0))};
    }
    nn::Tensor t({r, 4 * num_classes}, targets.targets);
    nn::Tensor w({r, 4 * num_classes}, targets.weights);
    return {nn::softmax_cross_entropy(out.logits, targets.labels, r), nn::smooth_l1(out.deltas, t, w, 1.0, r)};
}

}  // namespace stda
