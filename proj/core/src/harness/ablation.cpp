#include "stda/harness/ablation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace stda {

namespace fs = std::filesystem;

std::string AblationCell::name() const {
    switch (kind) {
        case Kind::baseline:
            return "baseline";
        case Kind::oracle:
            return "oracle";
        case Kind::adapted: {
            std::string s = modules.to_string();
            std::replace(s.begin(), s.end(), ',', '+');
            return s;
        }
    }
    return "baseline";
}

AblationCell AblationCell::parse(const std::string& name) {
    AblationCell c;
    if (name == "baseline") {
        return c;
    }
    if (name == "oracle") {
        c.kind = Kind::oracle;
        return c;
    }
    std::string list = name;
    std::replace(list.begin(), list.end(), '+', ',');
    c.kind = Kind::adapted;
    c.modules = ModuleFlags::parse(list);
    if (!c.modules.any()) {
        throw std::invalid_argument("ablation cell '" + name + "' enables no module");
    }
    return c;
}

std::vector<AblationCell> default_ablation_grid() {
    std::vector<AblationCell> grid;
    for (const char* name : {"baseline", "Timg", "Tinst", "Simg", "Timg+Tinst", "Timg+Simg", "Tinst+Simg",
                             "Timg+Tinst+Simg", "oracle"}) {
        grid.push_back(AblationCell::parse(name));
    }
    return grid;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<AblationRow> run_ablation(const KeyValues& config, const fs::path& out_dir, std::ostream* progress) {
    if (!config.contains("source_dataset") || !config.contains("target_dataset")) {
        throw std::invalid_argument("ablation needs source_dataset and target_dataset");
    }
    std::vector<AblationCell> cells;
    if (config.contains("cells")) {
        for (const auto& name : split_list(config.get_string("cells"), ',')) {
            cells.push_back(AblationCell::parse(name));
        }
    } else {
        cells = default_ablation_grid();
    }
    std::vector<long long> seeds;
    for (const auto& s : split_list(config.get_string("seeds", "1"), ',')) {
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
            throw std::invalid_argument("seeds: invalid seed '" + s + "'");
        }
        seeds.push_back(v);
    }
    const TrainConfig tc = TrainConfig::read(config);
    const EvalConfig eval = EvalConfig::read(config);
    const fs::path target = config.get_string("target_dataset");

    std::vector<AblationRow> rows;
    for (const auto& c : cells) {
        rows.push_back({c, {}, {}, 0.0, 0.0});
    }
    for (long long seed : seeds) {
        const fs::path seed_dir = out_dir / ("seed_" + std::to_string(seed));
        KeyValues base = config;
        base.erase("cells");
        base.erase("seeds");
        base.set("seed", seed);

        const fs::path pretrain_ckpt = seed_dir / "pretrain" / "checkpoint.ckpt";
        const bool needs_pretrain = std::any_of(cells.begin(), cells.end(), [](const AblationCell& c) {
            return c.kind != AblationCell::Kind::oracle;
        });
        if (needs_pretrain && !fs::exists(pretrain_ckpt)) {
            KeyValues kv = base;
            kv.set("mode", "pretrain");
            kv.set("modules", "none");
            if (progress != nullptr) {
                *progress << "[seed " << seed << "] pretrain" << std::endl;
            }
            run_training(kv, seed_dir / "pretrain", progress);
        }
        for (auto& row : rows) {
            const fs::path cell_dir = seed_dir / row.cell.name();
            const fs::path metrics = cell_dir / "metrics.kv";
            if (!fs::exists(metrics)) {
                KeyValues kv = base;
                if (row.cell.kind == AblationCell::Kind::oracle) {
                    kv.set("mode", "pretrain");
                    kv.set("modules", "none");
                    kv.set("source_dataset", target.string());
                    kv.set("pretrain_steps", tc.pretrain_steps + tc.adapt_steps);
                } else {
                    kv.set("mode", "adapt");
                    kv.set("modules", row.cell.modules.to_string());
                    kv.set("init", pretrain_ckpt.string());
                }
                if (progress != nullptr) {
                    *progress << "[seed " << seed << "] " << row.cell.name() << std::endl;
                }
                const TrainOutcome trained = run_training(kv, cell_dir, progress);
                run_evaluation(trained.checkpoint, target, Split::test, eval, cell_dir);
            }
            const MetricsReport report = MetricsReport::from_kv(KeyValues::load(metrics));
            row.frame_map.push_back(report.frame_map);
            row.video_map.push_back(report.video_map);
        }
    }
    KeyValues summary;
    for (auto& row : rows) {
        row.median_frame_map = median(row.frame_map);
        row.median_video_map = median(row.video_map);
        summary.set(row.cell.name() + ".frame_map", row.median_frame_map);
        summary.set(row.cell.name() + ".video_map", row.median_video_map);
    }
    fs::create_directories(out_dir);
    summary.save(out_dir / "ablation.kv");
    std::ofstream(out_dir / "ablation.txt") << format_ablation_table(rows);
    return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
    std::string s = "row               Timg Tinst Simg   frame-mAP  video-mAP  (median over seeds)\n";
    for (const auto& r : rows) {
        const bool adapted = r.cell.kind == AblationCell::Kind::adapted;
        auto mark = [&](bool on) { return adapted && on ? "  x  " : "     "; };
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-17s %s%s%s  %9.2f  %9.2f\n", r.cell.name().c_str(),
                      mark(r.cell.modules.temporal_image), mark(r.cell.modules.temporal_instance),
                      mark(r.cell.modules.spatial_image), 100.0 * r.median_frame_map, 100.0 * r.median_video_map);
        s += buf;
    }
    return s;
}

}  // namespace stda
