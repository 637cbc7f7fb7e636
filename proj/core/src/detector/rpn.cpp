#include "stda/detector/rpn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stda/nn/losses.hpp"

namespace stda {

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

constexpr double kRpnBeta = 1.0 / 9.0;

}  // namespace

RegionProposalNetwork::RegionProposalNetwork(int in_channels, int hidden_channels, const AnchorConfig& config,
                                             nn::Rng& rng)
    : conv_(in_channels, hidden_channels, 3, 1, 1, rng),
      objectness_(hidden_channels, config.anchors_per_location(), 1, 1, 0, rng, 0.01),
      deltas_(hidden_channels, 4 * config.anchors_per_location(), 1, 1, 0, rng, 0.01) {}

RpnOutput RegionProposalNetwork::operator()(const nn::Var& sf_map) const {
    nn::Var h = nn::relu(conv_(sf_map));
    return {objectness_(h), deltas_(h)};
}

void RegionProposalNetwork::collect(nn::ParameterSet& into, const std::string& prefix) const {
    conv_.collect(into, prefix + ".conv");
    objectness_.collect(into, prefix + ".objectness");
    deltas_.collect(into, prefix + ".deltas");
}

std::vector<std::vector<Proposal>> generate_proposals(const RpnOutput& rpn, std::span<const BoundingBox> anchors,
                                                      const AnchorConfig& config, int image_width, int image_height,
                                                      int keep) {
    const nn::Tensor& obj = rpn.objectness.value();
    const nn::Tensor& del = rpn.deltas.value();
    const int n = obj.dim(0);
    const int a_count = obj.dim(1);
    const int hw = obj.dim(2) * obj.dim(3);
    if (static_cast<std::size_t>(a_count * hw) != anchors.size()) {
        throw std::invalid_argument("generate_proposals: anchor count does not match objectness map");
    }
    const BoxCoder coder;
    std::vector<std::vector<Proposal>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<BoundingBox> boxes;
        std::vector<double> scores;
        boxes.reserve(anchors.size());
        scores.reserve(anchors.size());
        for (int a = 0; a < a_count; ++a) {
            for (int p = 0; p < hw; ++p) {
                const std::size_t anchor_idx = static_cast<std::size_t>(a) * hw + p;
                BoxCoder::Delta d;
                for (int k = 0; k < 4; ++k) {
                    d[static_cast<std::size_t>(k)] =
                        del[(static_cast<std::size_t>(i) * 4 * a_count + a * 4 + k) * hw + p];
                }
                const BoundingBox decoded = coder.decode(anchors[anchor_idx], d);
                const double x1 = std::clamp(decoded.x1(), 0.0, static_cast<double>(image_width));
                const double y1 = std::clamp(decoded.y1(), 0.0, static_cast<double>(image_height));
                const double x2 = std::clamp(decoded.x2(), 0.0, static_cast<double>(image_width));
                const double y2 = std::clamp(decoded.y2(), 0.0, static_cast<double>(image_height));
                if (x2 - x1 < config.min_size || y2 - y1 < config.min_size) {
                    continue;
                }
                boxes.emplace_back(x1, y1, x2, y2);
                scores.push_back(sigmoid(obj[(static_cast<std::size_t>(i) * a_count + a) * hw + p]));
            }
        }
        // Pre-NMS top-n by score.
        std::vector<int> order(boxes.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            order[k] = static_cast<int>(k);
        }
        std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return scores[l] > scores[r]; });
        if (static_cast<int>(order.size()) > config.pre_nms_top_n) {
            order.resize(static_cast<std::size_t>(config.pre_nms_top_n));
        }
        std::vector<BoundingBox> top_boxes;
        std::vector<double> top_scores;
        for (int k : order) {
            top_boxes.push_back(boxes[static_cast<std::size_t>(k)]);
            top_scores.push_back(scores[static_cast<std::size_t>(k)]);
        }
        for (int k : nms(top_boxes, top_scores, config.nms_iou, keep)) {
            out[static_cast<std::size_t>(i)].push_back({top_boxes[static_cast<std::size_t>(k)],
                                                        top_scores[static_cast<std::size_t>(k)]});
        }
    }
    return out;
}

nn::Var rpn_loss(const RpnOutput& rpn, std::span<const BoundingBox> anchors,
                 std::span<const std::vector<BoundingBox>> gt_per_image, const AnchorConfig& config) {
    const nn::Shape& os = rpn.objectness.shape();
    const int n = os[0];
    const int a_count = os[1];
    const int hw = os[2] * os[3];
    const int labeled = static_cast<int>(gt_per_image.size());
    if (labeled > n) {
        throw std::invalid_argument("rpn_loss: more ground-truth lists than images");
    }
    nn::Tensor obj_target(os, 0.0), obj_weight(os, 0.0);
    nn::Tensor reg_target(rpn.deltas.shape(), 0.0), reg_weight(rpn.deltas.shape(), 0.0);
    const BoxCoder coder;
    int valid = 0;
    int positives = 0;
    for (int i = 0; i < labeled; ++i) {
        const auto& gt = gt_per_image[static_cast<std::size_t>(i)];
        const AnchorMatch match = match_anchors(anchors, gt, config);
        for (int a = 0; a < a_count; ++a) {
            for (int p = 0; p < hw; ++p) {
                const std::size_t anchor_idx = static_cast<std::size_t>(a) * hw + p;
                const int label = match.labels[anchor_idx];
                if (label < 0) {
                    continue;
                }
                const std::size_t oi = (static_cast<std::size_t>(i) * a_count + a) * hw + p;
                obj_weight[oi] = 1.0;
                obj_target[oi] = label;
                ++valid;
                if (label == 1) {
                    ++positives;
                    const auto delta = coder.encode(anchors[anchor_idx], gt[static_cast<std::size_t>(match.matched_gt[anchor_idx])]);
                    for (int k = 0; k < 4; ++k) {
                        const std::size_t ri = (static_cast<std::size_t>(i) * 4 * a_count + a * 4 + k) * hw + p;
                        reg_target[ri] = delta[static_cast<std::size_t>(k)];
                        reg_weight[ri] = 1.0;
                    }
                }
            }
        }
    }
    if (valid == 0) {
        return nn::Var::constant(nn::Tensor::scalar(0.0));
    }
    const nn::Var cls = nn::scale(nn::sigmoid_bce_with_logits(rpn.objectness, obj_target, obj_weight), 1.0 / valid);
    const nn::Var reg = nn::smooth_l1(rpn.deltas, reg_target, reg_weight, kRpnBeta, std::max(positives, 1));
    return nn::add(cls, reg);
}

}  // namespace stda
