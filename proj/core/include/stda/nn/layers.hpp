#pragma once

#include <random>

#include "stda/nn/ops.hpp"

namespace stda::nn {

using Rng = std::mt19937_64;

/// He-normal weights unless `init_std` > 0; zero bias.
class Conv2d {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng, double init_std = 0.0);
    Var operator()(const Var& x) const { return conv2d(x, weight_, bias_, stride_, pad_); }
    void collect(ParameterSet& into, const std::string& prefix) const;
    int out_channels() const { return weight_.value().dim(0); }

private:
    Var weight_, bias_;
    int stride_, pad_;
};

class Conv3d {
public:
    Conv3d(int in_channels, int out_channels, int kernel_t, int kernel_s, int stride_t, int stride_s, Rng& rng);
    Var operator()(const Var& x) const;
    void collect(ParameterSet& into, const std::string& prefix) const;
    int out_channels() const { return weight_.value().dim(0); }

private:
    Var weight_, bias_;
    int stride_t_, stride_s_;
};

class Linear {
public:
    Linear(int in_features, int out_features, Rng& rng, double init_std = 0.0);
    Var operator()(const Var& x) const { return linear(x, weight_, bias_); }
    void collect(ParameterSet& into, const std::string& prefix) const;
    int in_features() const { return weight_.value().dim(1); }

private:
    Var weight_, bias_;
};

}  // namespace stda::nn
