#include "stda/nn/layers.hpp"

#include <cmath>

namespace stda::nn {

namespace {

Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
    Tensor t(std::move(shape));
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : t.values()) {
        v = dist(rng);
    }
    return t;
}

double he_std(int fan_in) { return std::sqrt(2.0 / fan_in); }

}  // namespace

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng, double init_std)
    : stride_(stride), pad_(pad) {
    const double sd = init_std > 0.0 ? init_std : he_std(in_channels * kernel * kernel);
    weight_ = Var::parameter(normal_tensor({out_channels, in_channels, kernel, kernel}, sd, rng));
    bias_ = Var::parameter(Tensor({out_channels}, 0.0));
}

void Conv2d::collect(ParameterSet& into, const std::string& prefix) const {
    into.add(prefix + ".weight", weight_);
    into.add(prefix + ".bias", bias_);
}

Conv3d::Conv3d(int in_channels, int out_channels, int kernel_t, int kernel_s, int stride_t, int stride_s, Rng& rng)
    : stride_t_(stride_t), stride_s_(stride_s) {
    const double sd = he_std(in_channels * kernel_t * kernel_s * kernel_s);
    weight_ = Var::parameter(normal_tensor({out_channels, in_channels, kernel_t, kernel_s, kernel_s}, sd, rng));
    bias_ = Var::parameter(Tensor({out_channels}, 0.0));
}

Var Conv3d::operator()(const Var& x) const {
    const int kt = weight_.value().dim(2);
    const int ks = weight_.value().dim(3);
    return conv3d(x, weight_, bias_, stride_t_, stride_s_, kt / 2, ks / 2);
}

void Conv3d::collect(ParameterSet& into, const std::string& prefix) const {
    into.add(prefix + ".weight", weight_);
    into.add(prefix + ".bias", bias_);
}

Linear::Linear(int in_features, int out_features, Rng& rng, double init_std) {
    const double sd = init_std > 0.0 ? init_std : he_std(in_features);
    weight_ = Var::parameter(normal_tensor({out_features, in_features}, sd, rng));
    bias_ = Var::parameter(Tensor({out_features}, 0.0));
}

void Linear::collect(ParameterSet& into, const std::string& prefix) const {
    into.add(prefix + ".weight", weight_);
    into.add(prefix + ".bias", bias_);
}

}  // namespace stda::nn
