#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "stda/adaptation/trainer.hpp"
#include "stda/evaluation/report.hpp"
#include "stda/synthdata/dataset.hpp"

namespace stda {

std::string version_string();

/// FNV-1a of the canonical config text, ignoring the bookkeeping keys
/// `config_hash` and `version`.
std::uint64_t config_hash(const KeyValues& config);

/// Model configuration for training on `data`: explicit keys in `config`
/// override the defaults; image size, clip length and class count come from
/// the dataset, and explicit keys contradicting it are an error.
ModelConfig model_config_for(const KeyValues& config, const VideoDataset& data);

/// Builds a model from a checkpoint's stored configuration and loads it.
std::unique_ptr<DomainAdaptiveModel> load_model(const std::filesystem::path& checkpoint);

struct TrainOutcome {
    std::filesystem::path checkpoint;
    std::filesystem::path loss_log;
    std::filesystem::path manifest;
    int steps = 0;
    LossBundle last;
};

/// One training invocation. Keys used: mode (pretrain | adapt), modules,
/// seed, init (checkpoint, required by adapt), source_dataset,
/// target_dataset (required by adapt), checkpoint_every, the TrainConfig keys
/// and the model keys. Writes <out>/checkpoint.ckpt, <out>/loss_log.txt and
/// <out>/run_manifest.txt; the manifest is itself a valid config for
/// repeating the run.
TrainOutcome run_training(const KeyValues& config, const std::filesystem::path& out_dir, std::ostream* progress);

/// Detections on every frame of every video, each frame as the keyframe of
/// its own clip.
std::vector<Detection> detect_videos(const ActionLocalizer& localizer, const VideoDataset& videos,
                                     int batch_size = 8);

/// Loads the checkpoint, detects on the split and writes <out>/detections.csv,
/// <out>/metrics.txt and <out>/metrics.kv.
MetricsReport run_evaluation(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset,
                             Split split, const EvalConfig& eval, const std::filesystem::path& out_dir);

}  // namespace stda
