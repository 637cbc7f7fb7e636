#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stda/adaptation/losses.hpp"
#include "stda/detector/localizer.hpp"

namespace stda {

/// Which adaptation modules take part in training.
struct ModuleFlags {
    bool temporal_image = false;     // Timg
    bool temporal_instance = false;  // Tinst
    bool spatial_image = false;      // Simg

    /// Comma list of Timg, Tinst, Simg; "" or "none" for no module, "all" for every one.
    static ModuleFlags parse(const std::string& text);
    static ModuleFlags all() { return {true, true, true}; }
    /// Canonical form, e.g. "Timg,Simg", or "none".
    std::string to_string() const;
    bool any() const { return temporal_image || temporal_instance || spatial_image; }
    bool operator==(const ModuleFlags&) const = default;
};

struct ObjectiveConfig {
    double gamma = 2.0;
    double lambda = 0.1;
    MapReduction map_reduction = MapReduction::sum;
    ModuleFlags modules;
    /// When true the reversal layers carry lambda and the adversarial loss
    /// enters the total unweighted. Gradients into the feature extractors are
    /// the same; discriminator gradients are larger by 1 / lambda.
    bool lambda_in_reversal = false;

    void validate() const;
};

/// Detector plus the three domain classifiers.
class DomainAdaptiveModel {
public:
    DomainAdaptiveModel(const ModelConfig& config, std::uint64_t init_seed);

    const ModelConfig& config() const { return localizer_.config(); }
    const ActionLocalizer& localizer() const { return localizer_; }
    const SpatialDiscriminator& spatial_discriminator() const { return d_s_; }
    const TemporalImageDiscriminator& temporal_image_discriminator() const { return d_timg_; }
    const TemporalInstanceDiscriminator& temporal_instance_discriminator() const { return d_tinst_; }

    /// Every trainable array, named "detector.*", "d_s.*", "d_timg.*", "d_tinst.*".
    const nn::ParameterSet& parameters() const { return parameters_; }
    /// Parameters of the discriminators selected by `which`.
    nn::ParameterSet discriminator_parameters(const ModuleFlags& which) const;

private:
    DomainAdaptiveModel(const ModelConfig& config, nn::Rng&& rng);

    ActionLocalizer localizer_;
    SpatialDiscriminator d_s_;
    TemporalImageDiscriminator d_timg_;
    TemporalInstanceDiscriminator d_tinst_;
    nn::ParameterSet parameters_;
};

/// A minibatch. Source clips come with keyframe boxes; target clips are bare
/// tensors, so nothing downstream can read a target label.
struct DomainBatch {
    nn::Tensor source_clips;                           // [n_s, C, T, H, W]
    std::vector<std::vector<LabeledBox>> source_boxes;  // n_s lists
    nn::Tensor target_clips;                           // [n_t, C, T, H, W], empty when absent

    int n_s() const { return source_clips.empty() ? 0 : source_clips.dim(0); }
    int n_t() const { return target_clips.empty() ? 0 : target_clips.dim(0); }
};

/// Stack [C, T, H, W] clips into [N, C, T, H, W].
nn::Tensor stack_clips(const std::vector<const nn::Tensor*>& clips);

struct LossBundle {
    double l_rpn = 0.0;
    double l_cls = 0.0;
    double l_reg = 0.0;
    double l_act = 0.0;
    double l_ds = 0.0;
    double l_dtimg = 0.0;
    double l_dtinst = 0.0;
    double l_adv = 0.0;
    double lambda = 0.0;
    double total = 0.0;
};

struct Objective {
    nn::Var total;
    nn::Var l_act;
    nn::Var l_adv;
    LossBundle bundle;
};

/// Forward pass of the full objective. The localization losses use source
/// clips only; each enabled module adds its domain loss over both domains
/// behind a gradient reversal layer. Disabled modules are not evaluated and
/// contribute an exact zero. Throws std::invalid_argument if a module is
/// enabled but the batch lacks source or target clips.
Objective total_objective(const DomainAdaptiveModel& model, const DomainBatch& batch, const ObjectiveConfig& config,
                          nn::Rng& roi_rng);

}  // namespace stda
