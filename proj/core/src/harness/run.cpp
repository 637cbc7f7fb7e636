#include "stda/harness/run.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "stda/detector/dump.hpp"
#include "stda/encoders/checkpoint.hpp"

#ifndef STDA_VERSION_STRING
#define STDA_VERSION_STRING "0.0.0"
#endif

namespace stda {

namespace fs = std::filesystem;

std::string version_string() { return STDA_VERSION_STRING; }

std::uint64_t config_hash(const KeyValues& config) {
    KeyValues canonical = config;
    canonical.erase("config_hash");
    canonical.erase("version");
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical.to_string()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

void require_match(const KeyValues& config, const std::string& key, int dataset_value) {
    if (config.contains(key) && config.get_int(key) != dataset_value) {
        throw std::invalid_argument(key + " = " + config.get_string(key) + " contradicts the dataset value " +
                                    std::to_string(dataset_value));
    }
}

KeyValues model_metadata(const ModelConfig& mc) {
    KeyValues kv;
    mc.write(kv);
    return kv;
}

void save_atomically(const fs::path& path, const nn::ParameterSet& params, const KeyValues& metadata) {
    fs::path tmp = path;
    tmp += ".tmp";
    save_checkpoint(tmp, params, metadata);
    fs::rename(tmp, path);
}

}  // namespace

ModelConfig model_config_for(const KeyValues& config, const VideoDataset& data) {
    if (data.num_videos() == 0) {
        throw std::invalid_argument("dataset has no videos");
    }
    require_match(config, "model.image_size", data.image_size());
    require_match(config, "encoder.clip_length", data.clip_length());
    require_match(config, "head.num_classes", data.num_classes());
    KeyValues kv = config;
    kv.set("model.image_size", data.image_size());
    kv.set("encoder.clip_length", data.clip_length());
    kv.set("head.num_classes", data.num_classes());
    return ModelConfig::read(kv);
}

std::unique_ptr<DomainAdaptiveModel> load_model(const fs::path& checkpoint) {
    if (!fs::exists(checkpoint)) {
        throw std::runtime_error("checkpoint not found: " + checkpoint.string());
    }
    const KeyValues meta = read_checkpoint_metadata(checkpoint);
    const ModelConfig mc = ModelConfig::read(meta);
    auto model = std::make_unique<DomainAdaptiveModel>(mc, 0);
    load_checkpoint(checkpoint, model->parameters(), model_metadata(mc));
    return model;
}

TrainOutcome run_training(const KeyValues& config, const fs::path& out_dir, std::ostream* progress) {
    const Phase mode = parse_phase(config.get_string("mode", "pretrain"));
    TrainConfig tc = TrainConfig::read(config);
    if (mode == Phase::pretrain && tc.objective.modules.any()) {
        throw std::invalid_argument("adaptation modules can only be enabled in adapt mode");
    }
    const int checkpoint_every = static_cast<int>(config.get_int("checkpoint_every", 0));
    if (!config.contains("source_dataset")) {
        throw std::invalid_argument("config is missing source_dataset");
    }
    const fs::path source_path = config.get_string("source_dataset");
    LabeledClipDataset source(source_path, Split::train);
    std::unique_ptr<UnlabeledClipDataset> target;
    std::unique_ptr<DomainAdaptiveModel> model;
    if (mode == Phase::adapt) {
        if (!config.contains("target_dataset")) {
            throw std::invalid_argument("adapt mode needs target_dataset");
        }
        if (!config.contains("init")) {
            throw std::invalid_argument("adapt mode needs an init checkpoint from pretraining");
        }
        target = std::make_unique<UnlabeledClipDataset>(fs::path(config.get_string("target_dataset")), Split::train);
        if (target->size() == 0) {
            throw std::invalid_argument("target dataset has no clips");
        }
        model = load_model(config.get_string("init"));
        const ModelConfig expected = model_config_for(config, source.videos());
        if (!(expected == model->config())) {
            throw std::invalid_argument("init checkpoint was built with a different model configuration");
        }
    } else {
        const ModelConfig mc = model_config_for(config, source.videos());
        model = std::make_unique<DomainAdaptiveModel>(mc, tc.seed);
        if (config.contains("init")) {
            load_checkpoint(config.get_string("init"), model->parameters(), model_metadata(mc));
        }
    }

    fs::create_directories(out_dir);
    TrainOutcome outcome;
    outcome.checkpoint = out_dir / "checkpoint.ckpt";
    outcome.loss_log = out_dir / "loss_log.txt";
    outcome.manifest = out_dir / "run_manifest.txt";

    KeyValues manifest = config;
    tc.write(manifest);
    model->config().write(manifest);
    manifest.set("mode", to_string(mode));
    manifest.set("version", version_string());
    manifest.set("config_hash", std::to_string(config_hash(manifest)));
    manifest.save(outcome.manifest);

    KeyValues metadata = model_metadata(model->config());
    metadata.set("run.mode", to_string(mode));
    metadata.set("run.modules", tc.objective.modules.to_string());
    metadata.set("run.seed", static_cast<long long>(tc.seed));
    metadata.set("run.config_hash", std::to_string(config_hash(manifest)));

    std::ofstream log(outcome.loss_log);
    if (!log) {
        throw std::runtime_error("cannot write " + outcome.loss_log.string());
    }
    log << loss_log_header() << '\n';
    Trainer trainer(*model, tc);
    const int total_steps = mode == Phase::pretrain ? tc.pretrain_steps : tc.adapt_steps;
    trainer.run(mode, source, target.get(), [&](const StepRecord& r) {
        log << format_loss_line(r) << '\n';
        log.flush();
        outcome.last = r.losses;
        outcome.steps = r.step + 1;
        if (checkpoint_every > 0 && (r.step + 1) % checkpoint_every == 0 && r.step + 1 < total_steps) {
            save_atomically(out_dir / ("checkpoint_step" + std::to_string(r.step + 1) + ".ckpt"),
                            model->parameters(), metadata);
        }
        if (progress != nullptr && ((r.step + 1) % 50 == 0 || r.step + 1 == total_steps)) {
            *progress << to_string(mode) << " step " << r.step + 1 << "/" << total_steps
                      << "  l_act=" << format_double(r.losses.l_act) << "  l_adv=" << format_double(r.losses.l_adv)
                      << std::endl;
        }
    });
    save_atomically(outcome.checkpoint, model->parameters(), metadata);
    return outcome;
}

std::vector<Detection> detect_videos(const ActionLocalizer& localizer, const VideoDataset& videos, int batch_size) {
    if (batch_size <= 0) {
        throw std::invalid_argument("batch_size must be positive");
    }
    std::vector<Detection> out;
    const std::size_t n = videos.num_clips();
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
        std::vector<nn::Tensor> clips;
        for (std::size_t i = start; i < end; ++i) {
            const auto [v, t] = videos.clip_position(i);
            clips.push_back(videos.clip(v, t));
        }
        std::vector<const nn::Tensor*> ptrs;
        for (const auto& c : clips) {
            ptrs.push_back(&c);
        }
        const auto dets = localizer.detect(stack_clips(ptrs));
        for (std::size_t i = start; i < end; ++i) {
            const auto [v, t] = videos.clip_position(i);
            for (Detection d : dets[i - start]) {
                d.video_id = v;
                d.frame_index = t;
                out.push_back(d);
            }
        }
    }
    return out;
}

MetricsReport run_evaluation(const fs::path& checkpoint, const fs::path& dataset, Split split, const EvalConfig& eval,
                             const fs::path& out_dir) {
    const auto model = load_model(checkpoint);
    const VideoDataset videos = VideoDataset::open(dataset, split);
    if (videos.num_videos() == 0) {
        throw std::invalid_argument("evaluation dataset has no videos: " + dataset.string());
    }
    const ModelConfig& mc = model->config();
    if (videos.image_size() != mc.image_size || videos.clip_length() != mc.encoder.clip_length ||
        videos.num_classes() != mc.head.num_classes) {
        throw std::invalid_argument("checkpoint and dataset disagree on image size, clip length or classes");
    }
    const auto detections = detect_videos(model->localizer(), videos);
    const auto gt = load_annotations(dataset, split);
    MetricsReport report = evaluate_detections(detections, gt, mc.head.num_classes, eval);
    fs::create_directories(out_dir);
    write_detections(out_dir / "detections.csv", detections);
    write_report(report, out_dir / "metrics");
    return report;
}

}  // namespace stda
