#include "stda/adaptation/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stda {

ModuleFlags ModuleFlags::parse(const std::string& text) {
    ModuleFlags f;
    for (const auto& item : split_list(text, ',')) {
        if (item == "none") {
            continue;
        }
        if (item == "all") {
            f = all();
        } else if (item == "Timg") {
            f.temporal_image = true;
        } else if (item == "Tinst") {
            f.temporal_instance = true;
        } else if (item == "Simg") {
            f.spatial_image = true;
        } else {
            throw std::invalid_argument("unknown adaptation module '" + item + "' (expected Timg, Tinst, Simg)");
        }
    }
    return f;
}

std::string ModuleFlags::to_string() const {
    std::string s;
    auto add = [&s](bool on, const char* name) {
        if (on) {
            s += s.empty() ? "" : ",";
            s += name;
        }
    };
    add(temporal_image, "Timg");
    add(temporal_instance, "Tinst");
    add(spatial_image, "Simg");
    return s.empty() ? "none" : s;
}

void ObjectiveConfig::validate() const {
    if (!std::isfinite(gamma) || gamma < 0.0) {
        throw std::invalid_argument("gamma must be finite and non-negative");
    }
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw std::invalid_argument("lambda must be finite and non-negative");
    }
}

DomainAdaptiveModel::DomainAdaptiveModel(const ModelConfig& config, std::uint64_t init_seed)
    : DomainAdaptiveModel(config, nn::Rng(init_seed)) {}

DomainAdaptiveModel::DomainAdaptiveModel(const ModelConfig& config, nn::Rng&& rng)
    : localizer_(config, rng),
      d_s_(config.encoder.sf_channels, config.discriminators, rng),
      d_timg_(config.encoder.tf1_channels, config.discriminators, rng),
      d_tinst_(config.encoder.tf2_channels, config.discriminators, rng) {
    localizer_.collect(parameters_, "detector");
    d_s_.collect(parameters_, "d_s");
    d_timg_.collect(parameters_, "d_timg");
    d_tinst_.collect(parameters_, "d_tinst");
}

nn::ParameterSet DomainAdaptiveModel::discriminator_parameters(const ModuleFlags& which) const {
    nn::ParameterSet out;
    if (which.spatial_image) {
        d_s_.collect(out, "d_s");
    }
    if (which.temporal_image) {
        d_timg_.collect(out, "d_timg");
    }
    if (which.temporal_instance) {
        d_tinst_.collect(out, "d_tinst");
    }
    return out;
}

nn::Tensor stack_clips(const std::vector<const nn::Tensor*>& clips) {
    if (clips.empty()) {
        return {};
    }
    const nn::Shape& s = clips.front()->shape();
    if (s.size() != 4) {
        throw std::invalid_argument("stack_clips: expected [C, T, H, W] clips, got " + nn::shape_string(s));
    }
    nn::Shape out_shape{static_cast<int>(clips.size())};
    out_shape.insert(out_shape.end(), s.begin(), s.end());
    nn::Tensor out(out_shape);
    const std::size_t each = clips.front()->size();
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (clips[i]->shape() != s) {
            throw std::invalid_argument("stack_clips: clips differ in shape");
        }
        std::copy_n(clips[i]->data(), each, out.data() + i * each);
    }
    return out;
}

namespace {

nn::Tensor concat_batches(const nn::Tensor& a, const nn::Tensor& b) {
    if (b.empty()) {
        return a;
    }
    if (a.rank() != b.rank() || !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1)) {
        throw std::invalid_argument("source and target clips differ in shape");
    }
    nn::Shape shape = a.shape();
    shape[0] += b.dim(0);
    std::vector<double> values(a.values().begin(), a.values().end());
    values.insert(values.end(), b.values().begin(), b.values().end());
    return nn::Tensor(shape, std::move(values));
}

nn::Var zero() { return nn::Var::constant(nn::Tensor::scalar(0.0)); }

}  // namespace

Objective total_objective(const DomainAdaptiveModel& model, const DomainBatch& batch, const ObjectiveConfig& config,
                          nn::Rng& roi_rng) {
    config.validate();
    const int n_s = batch.n_s();
    const int n_t = batch.n_t();
    if (n_s == 0) {
        throw std::invalid_argument("batch has no source clips");
    }
    if (static_cast<int>(batch.source_boxes.size()) != n_s) {
        throw std::invalid_argument("batch needs one box list per source clip");
    }
    const bool adapt = config.modules.any();
    if (adapt && n_t == 0) {
        throw std::invalid_argument("adaptation modules are enabled but the batch has no target clips");
    }
    const ActionLocalizer& loc = model.localizer();
    const ModelConfig& mc = loc.config();

    // Target clips only enter the forward pass when some module consumes them.
    const nn::Tensor clips = adapt ? concat_batches(batch.source_clips, batch.target_clips) : batch.source_clips;
    const int n = clips.dim(0);
    const nn::Var clip_var = nn::Var::constant(clips);
    const nn::Var sf = loc.spatial_features(nn::Var::constant(keyframes_of(clips)));
    const RpnOutput rpn = loc.rpn(sf);
    const nn::Var tf1 = loc.temporal_features(clip_var);

    std::vector<std::vector<BoundingBox>> gt_boxes(static_cast<std::size_t>(n_s));
    for (int i = 0; i < n_s; ++i) {
        for (const auto& b : batch.source_boxes[static_cast<std::size_t>(i)]) {
            gt_boxes[static_cast<std::size_t>(i)].push_back(b.box);
        }
    }
    const nn::Var l_rpn = rpn_loss(rpn, loc.anchors(), gt_boxes, mc.anchors);
    const auto proposals = loc.proposals(rpn, true);

    RoiTargets targets;
    for (int i = 0; i < n_s; ++i) {
        sample_rois(i, proposals[static_cast<std::size_t>(i)], batch.source_boxes[static_cast<std::size_t>(i)],
                    mc.head, roi_rng, targets);
    }
    HeadLosses head_losses{zero(), zero()};
    if (!targets.rois.empty()) {
        head_losses = detection_loss(loc.head(loc.instance_features(tf1, targets.rois)), targets, mc.head.num_classes);
    }
    const nn::Var l_act = nn::add(nn::add(l_rpn, head_losses.cls), head_losses.reg);

    nn::Var l_ds = zero(), l_dtimg = zero(), l_dtinst = zero();
    if (adapt) {
        const double reversal = config.lambda_in_reversal ? config.lambda : 1.0;
        std::vector<int> domains(static_cast<std::size_t>(n), 1);
        std::fill_n(domains.begin(), n_s, 0);
        if (config.modules.spatial_image) {
            const nn::Var p = model.spatial_discriminator()(nn::gradient_reversal(sf, reversal));
            l_ds = spatial_domain_loss(p, domains, config.gamma);
        }
        if (config.modules.temporal_image) {
            const nn::Var q = model.temporal_image_discriminator()(nn::gradient_reversal(tf1, reversal));
            l_dtimg = temporal_image_loss(q, domains, config.map_reduction);
        }
        if (config.modules.temporal_instance) {
            std::vector<nn::RoiRef> rois;
            std::vector<int> roi_image;
            for (int i = 0; i < n; ++i) {
                for (const auto& p : proposals[static_cast<std::size_t>(i)]) {
                    rois.push_back({i, p.box});
                    roi_image.push_back(i);
                }
            }
            if (!rois.empty()) {
                const nn::Var tf2 = loc.instance_features(tf1, rois);
                const nn::Var r = model.temporal_instance_discriminator()(nn::gradient_reversal(tf2, reversal));
                l_dtinst = temporal_instance_loss(r, roi_image, domains);
            }
        }
    }
    const nn::Var l_adv = nn::add(nn::add(l_ds, l_dtimg), l_dtinst);
    const nn::Var total =
        config.lambda_in_reversal ? nn::add(l_act, l_adv) : nn::add(l_act, nn::scale(l_adv, config.lambda));

    Objective out{total, l_act, l_adv, {}};
    LossBundle& b = out.bundle;
    b.l_rpn = l_rpn.item();
    b.l_cls = head_losses.cls.item();
    b.l_reg = head_losses.reg.item();
    b.l_act = l_act.item();
    b.l_ds = l_ds.item();
    b.l_dtimg = l_dtimg.item();
    b.l_dtinst = l_dtinst.item();
    b.l_adv = l_adv.item();
    b.lambda = config.lambda;
    b.total = total.item();
    return out;
}

}  // namespace stda
