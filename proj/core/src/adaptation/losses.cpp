#include "stda/adaptation/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace stda {

namespace {

constexpr double kEps = 1e-7;

std::array<double, 2> domain_counts(std::span<const int> domains) {
    std::array<double, 2> counts{0.0, 0.0};
    for (int d : domains) {
        if (d != 0 && d != 1) {
            throw std::invalid_argument("domain labels must be 0 (source) or 1 (target)");
        }
        counts[static_cast<std::size_t>(d)] += 1.0;
    }
    return counts;
}

double inverse_or_zero(double n) { return n > 0.0 ? 1.0 / n : 0.0; }

}  // namespace

MapReduction parse_map_reduction(const std::string& text) {
    if (text == "sum") {
        return MapReduction::sum;
    }
    if (text == "mean") {
        return MapReduction::mean;
    }
    throw std::invalid_argument("map_reduction must be 'sum' or 'mean', got '" + text + "'");
}

std::string to_string(MapReduction r) { return r == MapReduction::sum ? "sum" : "mean"; }

double focal_domain_loss(double p_true, double gamma) {
    const double p = std::clamp(p_true, kEps, 1.0 - kEps);
    return -std::pow(1.0 - p, gamma) * std::log(p);
}

nn::Var weighted_focal_sum(const nn::Var& p, std::span<const int> labels, std::span<const double> weights,
                           double gamma) {
    const nn::Tensor& pv = p.value();
    if (labels.size() != pv.size() || weights.size() != pv.size()) {
        throw std::invalid_argument("weighted_focal_sum: labels/weights size does not match probabilities");
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("weighted_focal_sum: gamma must be finite and non-negative");
    }
    double total = 0.0;
    std::vector<double> dloss_dp(pv.size(), 0.0);
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double raw = labels[i] == 1 ? pv[i] : 1.0 - pv[i];
        const double q = std::clamp(raw, kEps, 1.0 - kEps);
        const double one_minus = 1.0 - q;
        const double mod = std::pow(one_minus, gamma);
        total += weights[i] * (-mod * std::log(q));
        if (raw > kEps && raw < 1.0 - kEps) {
            // d/dq of -(1-q)^g log q
            double d = -mod / q;
            if (gamma != 0.0) {
                d += gamma * std::pow(one_minus, gamma - 1.0) * std::log(q);
            }
            dloss_dp[i] = weights[i] * (labels[i] == 1 ? d : -d);
        }
    }
    return nn::make_op(nn::Tensor::scalar(total), {p}, [dloss_dp = std::move(dloss_dp)](nn::Node& self) {
        nn::Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        const double g = self.grad.item();
        double* dst = in.grad_buffer().data();
        for (std::size_t i = 0; i < dloss_dp.size(); ++i) {
            dst[i] += g * dloss_dp[i];
        }
    });
}

nn::Var spatial_domain_loss(const nn::Var& p, std::span<const int> domains, double gamma) {
    if (p.value().size() != domains.size()) {
        throw std::invalid_argument("spatial_domain_loss: one probability per image expected");
    }
    const auto counts = domain_counts(domains);
    std::vector<double> w(domains.size());
    for (std::size_t i = 0; i < domains.size(); ++i) {
        w[i] = inverse_or_zero(counts[static_cast<std::size_t>(domains[i])]);
    }
    return weighted_focal_sum(p, domains, w, gamma);
}

nn::Var temporal_image_loss(const nn::Var& q, std::span<const int> domains, MapReduction reduction) {
    const nn::Tensor& qv = q.value();
    if (qv.rank() != 3 || static_cast<std::size_t>(qv.dim(0)) != domains.size()) {
        throw std::invalid_argument("temporal_image_loss: expected [N, H, W] map for N labeled images, got " +
                                    nn::shape_string(qv.shape()));
    }
    const auto counts = domain_counts(domains);
    const std::size_t hw = static_cast<std::size_t>(qv.dim(1)) * qv.dim(2);
    const double per_location = reduction == MapReduction::mean ? 1.0 / static_cast<double>(hw) : 1.0;
    std::vector<int> labels(qv.size());
    std::vector<double> w(qv.size());
    for (std::size_t i = 0; i < domains.size(); ++i) {
        const double wi = inverse_or_zero(counts[static_cast<std::size_t>(domains[i])]) * per_location;
        std::fill_n(labels.begin() + static_cast<std::ptrdiff_t>(i * hw), hw, domains[i]);
        std::fill_n(w.begin() + static_cast<std::ptrdiff_t>(i * hw), hw, wi);
    }
    return weighted_focal_sum(q, labels, w, 0.0);
}

nn::Var temporal_instance_loss(const nn::Var& r, std::span<const int> roi_image, std::span<const int> domains) {
    if (r.value().size() != roi_image.size()) {
        throw std::invalid_argument("temporal_instance_loss: one image index per ROI expected");
    }
    const auto counts = domain_counts(domains);
    std::vector<int> labels(roi_image.size());
    std::vector<double> w(roi_image.size());
    for (std::size_t k = 0; k < roi_image.size(); ++k) {
        const int img = roi_image[k];
        if (img < 0 || static_cast<std::size_t>(img) >= domains.size()) {
            throw std::out_of_range("temporal_instance_loss: ROI image index out of range");
        }
        labels[k] = domains[static_cast<std::size_t>(img)];
        w[k] = inverse_or_zero(counts[static_cast<std::size_t>(labels[k])]);
    }
    return weighted_focal_sum(r, labels, w, 0.0);
}

}  // namespace stda
