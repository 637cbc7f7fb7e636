#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "stda/detector/dump.hpp"
#include "stda/harness/ablation.hpp"
#include "stda/harness/run.hpp"
#include "stda/synthdata/generator.hpp"

namespace fs = std::filesystem;
using namespace stda;

namespace {

KeyValues load_config(const std::string& path) { return path.empty() ? KeyValues{} : KeyValues::load(path); }

// --set key=value overrides, applied last.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("--set expects key=value, got '" + item + "'");
        }
        kv.set(item.substr(0, eq), item.substr(eq + 1));
    }
}

Split parse_split(const std::string& s) {
    if (s == "train") {
        return Split::train;
    }
    if (s == "test") {
        return Split::test;
    }
    throw std::invalid_argument("split must be train or test, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial domain adaptation for spatio-temporal action localization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    std::string config_path, out_dir, mode, modules, init, checkpoint, dataset, split = "test", detections,
                                                                     annotations, seeds, cells;
    long long seed = -1;
    int top_k = 1000;
    unsigned threads = 0;
    std::vector<std::string> overrides;

    auto* gen = app.add_subcommand("generate", "render a synthetic video dataset from a domain spec");
    gen->add_option("--config", config_path, "domain and generator spec (key = value)")->required();
    gen->add_option("--out", out_dir, "output dataset directory")->required();
    gen->add_option("--seed", seed, "override domain.seed");
    gen->add_option("--threads", threads, "render workers (0 = all cores)");
    gen->add_option("--set", overrides, "key=value override");

    auto* train = app.add_subcommand("train", "pretrain on source clips or adapt to a target domain");
    train->add_option("--config", config_path, "run config (key = value)")->required();
    train->add_option("--mode", mode, "pretrain | adapt")->check(CLI::IsMember({"pretrain", "adapt"}));
    train->add_option("--modules", modules, "adaptation modules, e.g. Timg,Tinst,Simg");
    train->add_option("--seed", seed, "random seed");
    train->add_option("--init", init, "checkpoint to start from (required for adapt)");
    train->add_option("--out", out_dir, "run directory")->required();
    train->add_option("--set", overrides, "key=value override");

    auto* evaluate = app.add_subcommand("evaluate", "frame/video mAP and error analysis of a checkpoint");
    evaluate->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    evaluate->add_option("--dataset", dataset, "dataset directory")->required();
    evaluate->add_option("--split", split, "train | test");
    evaluate->add_option("--config", config_path, "eval config (eval.* keys)");
    evaluate->add_option("--out", out_dir, "report directory")->required();
    evaluate->add_option("--set", overrides, "key=value override");

    auto* ablate = app.add_subcommand("ablate", "run the module ablation grid");
    ablate->add_option("--config", config_path, "run config (key = value)")->required();
    ablate->add_option("--out", out_dir, "output directory (resumable)")->required();
    ablate->add_option("--seeds", seeds, "comma-separated seeds");
    ablate->add_option("--cells", cells, "comma-separated rows, e.g. baseline,Timg,Timg+Tinst+Simg");
    ablate->add_option("--set", overrides, "key=value override");

    auto* errors = app.add_subcommand("analyze-errors", "error breakdown of the top-ranked detections");
    errors->add_option("--detections", detections, "detection dump")->required();
    errors->add_option("--annotations", annotations, "ground-truth annotation file");
    errors->add_option("--dataset", dataset, "dataset directory (uses <split>/annotations.txt)");
    errors->add_option("--split", split, "train | test");
    errors->add_option("--top-k", top_k, "number of top detections analyzed");
    errors->add_option("--out", out_dir, "write <out>/errors.kv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            KeyValues kv = load_config(config_path);
            apply_overrides(kv, overrides);
            if (seed >= 0) {
                kv.set("domain.seed", seed);
            }
            const DomainSpec spec = DomainSpec::read(kv);
            const GeneratorConfig gc = GeneratorConfig::read(kv);
            generate_dataset(spec, gc, out_dir, threads);
            std::cout << "wrote " << gc.train_videos << " train and " << gc.test_videos << " test videos to "
                      << out_dir << "\n";
        } else if (*train) {
            KeyValues kv = load_config(config_path);
            if (!mode.empty()) {
                kv.set("mode", mode);
            }
            if (!modules.empty()) {
                kv.set("modules", ModuleFlags::parse(modules).to_string());
            }
            if (seed >= 0) {
                kv.set("seed", seed);
            }
            if (!init.empty()) {
                kv.set("init", init);
            }
            apply_overrides(kv, overrides);
            const TrainOutcome r = run_training(kv, out_dir, &std::cerr);
            std::cout << "checkpoint " << r.checkpoint.string() << "\nloss log " << r.loss_log.string()
                      << "\nmanifest " << r.manifest.string() << "\n";
        } else if (*evaluate) {
            KeyValues kv = load_config(config_path);
            apply_overrides(kv, overrides);
            const MetricsReport r =
                run_evaluation(checkpoint, dataset, parse_split(split), EvalConfig::read(kv), out_dir);
            std::cout << r.to_text();
        } else if (*ablate) {
            KeyValues kv = load_config(config_path);
            if (!seeds.empty()) {
                kv.set("seeds", seeds);
            }
            if (!cells.empty()) {
                kv.set("cells", cells);
            }
            apply_overrides(kv, overrides);
            std::cout << format_ablation_table(run_ablation(kv, out_dir, &std::cerr));
        } else if (*errors) {
            if (annotations.empty() == dataset.empty()) {
                throw std::invalid_argument("give exactly one of --annotations or --dataset");
            }
            const auto dets = read_detections(fs::path(detections));
            const auto gt = annotations.empty() ? load_annotations(dataset, parse_split(split))
                                                : read_annotations(fs::path(annotations));
            const ErrorBreakdown b = error_analysis(dets, gt, top_k);
            KeyValues kv;
            kv.set("errors.correct", b.correct);
            kv.set("errors.mislocalized", b.mislocalized);
            kv.set("errors.background", b.background);
            kv.set("errors.incorrect", b.incorrect);
            kv.set("errors.analyzed", b.analyzed);
            std::cout << kv.to_string();
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                kv.save(fs::path(out_dir) / "errors.kv");
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
