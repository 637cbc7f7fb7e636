#pragma once

#include <span>
#include <string>
#include <vector>

#include "stda/nn/autograd.hpp"

namespace stda {

/// How the per-location temporal image-level loss is reduced over the map.
enum class MapReduction { sum, mean };

MapReduction parse_map_reduction(const std::string& text);
std::string to_string(MapReduction r);

/// -(1 - p)^gamma * log(p), with p clamped to [1e-7, 1 - 1e-7].
double focal_domain_loss(double p_true, double gamma);

/// Elementwise weighted focal loss against binary labels, summed:
/// sum_i w_i * focal(p_true_i, gamma) where p_true_i = p_i for label 1 and
/// 1 - p_i for label 0. `p` holds probabilities of label 1 (the target domain).
nn::Var weighted_focal_sum(const nn::Var& p, std::span<const int> labels, std::span<const double> weights,
                           double gamma);

/// Domain labels: 0 source, 1 target.
/// Spatial image-level: mean focal loss over source images plus mean over target images.
nn::Var spatial_domain_loss(const nn::Var& p, std::span<const int> domains, double gamma);

/// Temporal image-level: per image, the sum (or mean) of binary cross-entropy
/// over the map Q [N, H, W]; then averaged per domain and the two means added.
nn::Var temporal_image_loss(const nn::Var& q, std::span<const int> domains, MapReduction reduction);

/// Temporal instance-level: per image, the sum of binary cross-entropy over its
/// ROIs; averaged per domain over all images (ROI-less images count as zero).
/// `roi_image[k]` is the batch index of ROI k.
nn::Var temporal_instance_loss(const nn::Var& r, std::span<const int> roi_image, std::span<const int> domains);

}  // namespace stda
