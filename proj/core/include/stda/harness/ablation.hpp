#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stda/harness/run.hpp"

namespace stda {

/// One row of the ablation table.
struct AblationCell {
    enum class Kind { baseline, adapted, oracle };
    Kind kind = Kind::baseline;
    ModuleFlags modules;

    /// "baseline", "oracle", or the module list joined by '+', e.g. "Timg+Simg".
    std::string name() const;
    static AblationCell parse(const std::string& name);
};

/// Baseline, the three single modules, the three pairs, all modules, oracle.
std::vector<AblationCell> default_ablation_grid();

struct AblationRow {
    AblationCell cell;
    std::vector<double> frame_map;  // per seed
    std::vector<double> video_map;
    double median_frame_map = 0.0;
    double median_video_map = 0.0;
};

double median(std::vector<double> values);

/// Runs every cell for every seed under <out>/seed_<s>/<cell>/, skipping cells
/// whose metrics.kv already exists. The baseline continues source-only
/// training for adapt_steps so that every non-oracle row trains equally long;
/// the oracle trains on labeled target clips for pretrain_steps + adapt_steps.
/// Keys: seeds (comma list, default "1"), cells (comma list of cell names,
/// default the full grid), source_dataset, target_dataset, plus training,
/// model and eval keys. Writes <out>/ablation.txt and <out>/ablation.kv.
std::vector<AblationRow> run_ablation(const KeyValues& config, const std::filesystem::path& out_dir,
                                      std::ostream* progress);

std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace stda
