#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stda/adaptation/objective.hpp"
#include "stda/nn/optim.hpp"

namespace stda {

struct LabeledClip {
    nn::Tensor clip;                // [C, T, H, W]
    std::vector<LabeledBox> boxes;  // keyframe ground truth
};

/// A target-domain clip. There is deliberately no label field.
struct UnlabeledClip {
    nn::Tensor clip;
};

class LabeledClipSource {
public:
    virtual ~LabeledClipSource() = default;
    virtual std::size_t size() const = 0;
    virtual LabeledClip clip(std::size_t index) const = 0;
};

class UnlabeledClipSource {
public:
    virtual ~UnlabeledClipSource() = default;
    virtual std::size_t size() const = 0;
    virtual UnlabeledClip clip(std::size_t index) const = 0;
};

enum class Phase { pretrain, adapt };

Phase parse_phase(const std::string& text);
std::string to_string(Phase phase);

struct TrainConfig {
    ObjectiveConfig objective;
    int pretrain_steps = 300;
    int adapt_steps = 300;
    double lr_pretrain = 1e-3;
    double lr_adapt = 1e-3;
    int n_s = 2;
    int n_t = 2;
    std::uint64_t seed = 0;

    void validate() const;
    /// Keys: gamma, lambda, map_reduction, modules, pretrain_steps, adapt_steps,
    /// lr_pretrain, lr_adapt, n_s, n_t, seed.
    void write(KeyValues& kv) const;
    static TrainConfig read(const KeyValues& kv);
};

struct StepRecord {
    int step = 0;
    Phase phase = Phase::pretrain;
    LossBundle losses;
};

/// Loss log: a '#' header naming the columns, then one line per step:
///   step phase l_rpn l_cls l_reg l_act l_ds l_dtimg l_dtinst l_adv lambda total
std::string loss_log_header();
std::string format_loss_line(const StepRecord& record);
std::vector<StepRecord> read_loss_log(const std::filesystem::path& path);

/// Single-optimizer trainer. Source sampling, target sampling and ROI
/// sampling draw from three independent streams derived from the seed, so
/// a run's source-side randomness does not depend on whether target clips
/// are drawn.
class Trainer {
public:
    Trainer(const DomainAdaptiveModel& model, TrainConfig config);

    /// Pretrain minimizes the localization loss on source clips; adapt
    /// minimizes the full objective with the configured modules and requires
    /// a non-empty target source. Throws std::runtime_error naming the loss
    /// component if any becomes non-finite.
    void run(Phase phase, const LabeledClipSource& source, const UnlabeledClipSource* target,
             const std::function<void(const StepRecord&)>& on_step);

    /// One step on an explicit batch (no sampling).
    LossBundle step(const DomainBatch& batch, Phase phase, double learning_rate, int step_index = 0);

private:
    const DomainAdaptiveModel& model_;
    TrainConfig config_;
    nn::Rng roi_rng_;
    nn::Adam optimizer_;
};

/// Throws std::runtime_error naming the first non-finite component.
void check_finite(const LossBundle& losses, int step);

}  // namespace stda
