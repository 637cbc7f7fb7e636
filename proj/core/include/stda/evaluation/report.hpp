#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stda/core/kv.hpp"
#include "stda/evaluation/ap.hpp"
#include "stda/evaluation/errors.hpp"

namespace stda {

struct MetricsReport {
    std::vector<std::optional<double>> frame_ap;  // per class
    double frame_map = 0.0;
    std::vector<std::optional<double>> video_ap;
    double video_map = 0.0;
    ErrorBreakdown errors;
    int num_detections = 0;
    int num_ground_truth = 0;
    std::vector<std::string> warnings;

    /// Machine-readable form: frame_map, video_map, frame_ap.<c>, video_ap.<c>
    /// ("undefined" where a class has no ground truth), errors.*.
    KeyValues to_kv() const;
    static MetricsReport from_kv(const KeyValues& kv);
    /// Human-readable table.
    std::string to_text() const;
};

/// Frame and video mAP plus the error breakdown of the top-k detections.
MetricsReport evaluate_detections(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthInstance>& gt, int num_classes,
                                  const EvalConfig& config);

/// Writes <stem>.txt and <stem>.kv.
void write_report(const MetricsReport& report, const std::filesystem::path& stem);

}  // namespace stda
