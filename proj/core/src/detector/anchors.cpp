#include "stda/detector/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stda {

void AnchorConfig::validate() const {
    if (scales.empty() || aspect_ratios.empty()) {
        throw std::invalid_argument("AnchorConfig: scales and aspect_ratios must be non-empty");
    }
    for (double s : scales) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("AnchorConfig: scales must be positive");
        }
    }
    for (double r : aspect_ratios) {
        if (!(r > 0.0)) {
            throw std::invalid_argument("AnchorConfig: aspect ratios must be positive");
        }
    }
    if (!(0.0 <= rpn_negative_iou && rpn_negative_iou < rpn_positive_iou && rpn_positive_iou <= 1.0)) {
        throw std::invalid_argument("AnchorConfig: need 0 <= rpn_negative_iou < rpn_positive_iou <= 1");
    }
    if (pre_nms_top_n <= 0 || post_nms_top_n_train <= 0 || post_nms_top_n_test <= 0) {
        throw std::invalid_argument("AnchorConfig: proposal counts must be positive");
    }
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) {
        throw std::invalid_argument("AnchorConfig: nms_iou must be in (0, 1]");
    }
}

namespace {

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += format_double(v[i]);
        if (i + 1 < v.size()) {
            s += ",";
        }
    }
    return s;
}

}  // namespace

void AnchorConfig::write(KeyValues& kv) const {
    kv.set("anchor.scales", join(scales));
    kv.set("anchor.aspect_ratios", join(aspect_ratios));
    kv.set("anchor.rpn_positive_iou", rpn_positive_iou);
    kv.set("anchor.rpn_negative_iou", rpn_negative_iou);
    kv.set("anchor.pre_nms_top_n", pre_nms_top_n);
    kv.set("anchor.post_nms_top_n_train", post_nms_top_n_train);
    kv.set("anchor.post_nms_top_n_test", post_nms_top_n_test);
    kv.set("anchor.nms_iou", nms_iou);
    kv.set("anchor.min_size", min_size);
}

AnchorConfig AnchorConfig::read(const KeyValues& kv) {
    AnchorConfig c;
    c.scales = kv.get_doubles("anchor.scales", c.scales);
    c.aspect_ratios = kv.get_doubles("anchor.aspect_ratios", c.aspect_ratios);
    c.rpn_positive_iou = kv.get_double("anchor.rpn_positive_iou", c.rpn_positive_iou);
    c.rpn_negative_iou = kv.get_double("anchor.rpn_negative_iou", c.rpn_negative_iou);
    c.pre_nms_top_n = static_cast<int>(kv.get_int("anchor.pre_nms_top_n", c.pre_nms_top_n));
    c.post_nms_top_n_train = static_cast<int>(kv.get_int("anchor.post_nms_top_n_train", c.post_nms_top_n_train));
    c.post_nms_top_n_test = static_cast<int>(kv.get_int("anchor.post_nms_top_n_test", c.post_nms_top_n_test));
    c.nms_iou = kv.get_double("anchor.nms_iou", c.nms_iou);
    c.min_size = kv.get_double("anchor.min_size", c.min_size);
    c.validate();
    return c;
}

std::vector<BoundingBox> generate_anchors(const AnchorConfig& config, int feat_h, int feat_w, int stride) {
    std::vector<BoundingBox> anchors;
    anchors.reserve(static_cast<std::size_t>(config.anchors_per_location()) * feat_h * feat_w);
    for (double scale : config.scales) {
        for (double ratio : config.aspect_ratios) {
            const double w = scale / std::sqrt(ratio);
            const double h = scale * std::sqrt(ratio);
            for (int y = 0; y < feat_h; ++y) {
                for (int x = 0; x < feat_w; ++x) {
                    const double cx = (x + 0.5) * stride;
                    const double cy = (y + 0.5) * stride;
                    anchors.emplace_back(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
                }
            }
        }
    }
    return anchors;
}

std::vector<int> nms(std::span<const BoundingBox> boxes, std::span<const double> scores, double iou_threshold,
                     int max_keep) {
    if (boxes.size() != scores.size()) {
        throw std::invalid_argument("nms: boxes and scores differ in length");
    }
    std::vector<int> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<int> keep;
    std::vector<char> suppressed(boxes.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const int a = order[i];
        if (suppressed[a]) {
            continue;
        }
        keep.push_back(a);
        if (max_keep >= 0 && static_cast<int>(keep.size()) >= max_keep) {
            break;
        }
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const int b = order[j];
            if (!suppressed[b] && iou_2d(boxes[a], boxes[b]) > iou_threshold) {
                suppressed[b] = 1;
            }
        }
    }
    return keep;
}

AnchorMatch match_anchors(std::span<const BoundingBox> anchors, std::span<const BoundingBox> gt,
                          const AnchorConfig& config) {
    AnchorMatch m;
    m.labels.assign(anchors.size(), 0);
    m.matched_gt.assign(anchors.size(), -1);
    if (gt.empty()) {
        return m;
    }
    std::vector<double> gt_best(gt.size(), 0.0);
    std::vector<double> ious(anchors.size() * gt.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        for (std::size_t g = 0; g < gt.size(); ++g) {
            const double iou = iou_2d(anchors[a], gt[g]);
            ious[a * gt.size() + g] = iou;
            gt_best[g] = std::max(gt_best[g], iou);
        }
    }
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        int arg = 0;
        for (std::size_t g = 1; g < gt.size(); ++g) {
            if (ious[a * gt.size() + g] > ious[a * gt.size() + arg]) {
                arg = static_cast<int>(g);
            }
        }
        m.matched_gt[a] = arg;
        const double iou = ious[a * gt.size() + arg];
        if (iou >= config.rpn_positive_iou) {
            m.labels[a] = 1;
        } else if (iou < config.rpn_negative_iou) {
            m.labels[a] = 0;
        } else {
            m.labels[a] = -1;
        }
    }
    for (std::size_t g = 0; g < gt.size(); ++g) {
        if (gt_best[g] <= 0.0) {
            continue;
        }
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (ious[a * gt.size() + g] == gt_best[g]) {
                m.labels[a] = 1;
                m.matched_gt[a] = static_cast<int>(g);
            }
        }
    }
    return m;
}

}  // namespace stda
