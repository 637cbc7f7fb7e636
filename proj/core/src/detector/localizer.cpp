#include "stda/detector/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stda {

void ModelConfig::validate() const {
    encoder.validate();
    anchors.validate();
    head.validate();
    discriminators.validate();
    if (image_size <= 0 || image_size % encoder.spatial_stride != 0) {
        throw std::invalid_argument("ModelConfig: image_size must be a positive multiple of the spatial stride");
    }
    if (rpn_hidden <= 0) {
        throw std::invalid_argument("ModelConfig: rpn_hidden must be positive");
    }
}

void ModelConfig::write(KeyValues& kv) const {
    kv.set("model.image_size", image_size);
    kv.set("model.rpn_hidden", rpn_hidden);
    encoder.write(kv);
    anchors.write(kv);
    head.write(kv);
    discriminators.write(kv);
}

ModelConfig ModelConfig::read(const KeyValues& kv) {
    ModelConfig c;
    c.image_size = static_cast<int>(kv.get_int("model.image_size", c.image_size));
    c.rpn_hidden = static_cast<int>(kv.get_int("model.rpn_hidden", c.rpn_hidden));
    c.encoder = EncoderConfig::read(kv, c.encoder);
    c.anchors = AnchorConfig::read(kv);
    c.head = HeadConfig::read(kv);
    c.discriminators = DiscriminatorConfig::read(kv);
    c.validate();
    return c;
}

nn::Tensor keyframes_of(const nn::Tensor& clips) {
    if (clips.rank() != 5) {
        throw std::invalid_argument("keyframes_of: expected [N, C, T, H, W], got " + nn::shape_string(clips.shape()));
    }
    const int n = clips.dim(0), c = clips.dim(1), t = clips.dim(2), h = clips.dim(3), w = clips.dim(4);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    nn::Tensor out({n, c, h, w});
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const double* src = clips.data() + ((static_cast<std::size_t>(i) * c + ch) * t + t / 2) * plane;
            std::copy(src, src + plane, out.data() + (static_cast<std::size_t>(i) * c + ch) * plane);
        }
    }
    return out;
}

ActionLocalizer::ActionLocalizer(const ModelConfig& config, nn::Rng& rng)
    : config_((config.validate(), config)),
      sf_(config.encoder, rng),
      rpn_(config.encoder.sf_channels, config.rpn_hidden, config.anchors, rng),
      tf1_(config.encoder, rng),
      tf2_(config.encoder, rng),
      head_(config.encoder.tf2_channels, config.head.num_classes, rng) {
    const int f = config_.encoder.feature_size(config_.image_size);
    anchors_ = generate_anchors(config_.anchors, f, f, config_.encoder.spatial_stride);
}

std::vector<std::vector<Proposal>> ActionLocalizer::proposals(const RpnOutput& rpn_out, bool training) const {
    const int keep = training ? config_.anchors.post_nms_top_n_train : config_.anchors.post_nms_top_n_test;
    return generate_proposals(rpn_out, anchors_, config_.anchors, config_.image_size, config_.image_size, keep);
}

nn::Var ActionLocalizer::instance_features(const nn::Var& tf1_map, std::span<const nn::RoiRef> rois) const {
    return tf2_(roi_pool(tf1_map, rois, config_.encoder, config_.image_size, config_.image_size));
}

std::vector<Detection> postprocess_detections(const HeadOutput& out, std::span<const BoundingBox> rois,
                                              const HeadConfig& config, int image_width, int image_height) {
    const nn::Tensor& logits = out.logits.value();
    const nn::Tensor& deltas = out.deltas.value();
    const int c = config.num_classes;
    const BoxCoder& coder = head_box_coder();
    std::vector<Detection> all;
    for (int cls = 0; cls < c; ++cls) {
        std::vector<BoundingBox> boxes;
        std::vector<double> scores;
        for (std::size_t r = 0; r < rois.size(); ++r) {
            const double* row = logits.data() + r * static_cast<std::size_t>(c + 1);
            const double mx = *std::max_element(row, row + c + 1);
            double z = 0.0;
            for (int k = 0; k <= c; ++k) {
                z += std::exp(row[k] - mx);
            }
            const double score = std::exp(row[cls + 1] - mx) / z;
            if (score < config.score_threshold) {
                continue;
            }
            BoxCoder::Delta d;
            for (int k = 0; k < 4; ++k) {
                d[static_cast<std::size_t>(k)] = deltas[r * 4 * static_cast<std::size_t>(c) + 4 * cls + k];
            }
            const BoundingBox b = coder.decode(rois[r], d);
            const double x1 = std::clamp(b.x1(), 0.0, static_cast<double>(image_width));
            const double y1 = std::clamp(b.y1(), 0.0, static_cast<double>(image_height));
            const double x2 = std::clamp(b.x2(), 0.0, static_cast<double>(image_width));
            const double y2 = std::clamp(b.y2(), 0.0, static_cast<double>(image_height));
            if (!(x2 > x1 && y2 > y1)) {
                continue;
            }
            boxes.emplace_back(x1, y1, x2, y2);
            scores.push_back(std::min(score, 1.0));
        }
        for (int k : nms(boxes, scores, config.detection_nms_iou)) {
            Detection det;
            det.box = boxes[static_cast<std::size_t>(k)];
            det.class_id = cls;
            det.score = scores[static_cast<std::size_t>(k)];
            all.push_back(det);
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
    if (static_cast<int>(all.size()) > config.max_detections) {
        all.resize(static_cast<std::size_t>(config.max_detections));
    }
    return all;
}

std::vector<std::vector<Detection>> ActionLocalizer::detect(const nn::Tensor& clips) const {
    nn::NoGradGuard no_grad;
    const nn::Var clip_var = nn::Var::constant(clips);
    const nn::Var sf = sf_(nn::Var::constant(keyframes_of(clips)));
    const RpnOutput rpn_out = rpn_(sf);
    const auto props = proposals(rpn_out, false);
    std::vector<nn::RoiRef> rois;
    for (std::size_t i = 0; i < props.size(); ++i) {
        for (const auto& p : props[i]) {
            rois.push_back({static_cast<int>(i), p.box});
        }
    }
    std::vector<std::vector<Detection>> out(props.size());
    if (rois.empty()) {
        return out;
    }
    const nn::Var tf1 = tf1_(clip_var);
    const HeadOutput h = head_(instance_features(tf1, rois));
    std::size_t offset = 0;
    for (std::size_t i = 0; i < props.size(); ++i) {
        const std::size_t count = props[i].size();
        if (count == 0) {
            continue;
        }
        std::vector<BoundingBox> boxes;
        for (const auto& p : props[i]) {
            boxes.push_back(p.box);
        }
        std::vector<int> rows(count);
        for (std::size_t k = 0; k < count; ++k) {
            rows[k] = static_cast<int>(offset + k);
        }
        HeadOutput slice{nn::select_rows(h.logits, rows), nn::select_rows(h.deltas, rows)};
        out[i] = postprocess_detections(slice, boxes, config_.head, config_.image_size, config_.image_size);
        offset += count;
    }
    return out;
}

void ActionLocalizer::collect(nn::ParameterSet& into, const std::string& prefix) const {
    sf_.collect(into, prefix + ".sf");
    rpn_.collect(into, prefix + ".rpn");
    tf1_.collect(into, prefix + ".tf1");
    tf2_.collect(into, prefix + ".tf2");
    head_.collect(into, prefix + ".head");
}

}  // namespace stda
