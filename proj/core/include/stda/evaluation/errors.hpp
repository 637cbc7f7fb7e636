#pragma once

#include <span>

#include "stda/core/records.hpp"

namespace stda {

enum class ErrorType { correct, mislocalized, background, incorrect };

struct ErrorBreakdown {
    double correct = 0.0;
    double mislocalized = 0.0;
    double background = 0.0;
    double incorrect = 0.0;
    int analyzed = 0;
};

/// Bucket of one detection against the ground truth on its frame. The class
/// of the best-overlapping box decides "incorrect" first; otherwise IoU >= 0.5
/// is correct, [0.3, 0.5) mislocalized, below 0.3 background. A frame without
/// overlapping ground truth makes the detection background.
ErrorType classify_detection(const Detection& d, std::span<const GroundTruthInstance> gt);

/// Fractions over the `top_k` highest-scoring detections (all zero when empty).
ErrorBreakdown error_analysis(std::span<const Detection> detections, std::span<const GroundTruthInstance> gt,
                              int top_k);

}  // namespace stda
