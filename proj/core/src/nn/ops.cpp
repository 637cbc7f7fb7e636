#include "stda/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stda::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                                    shape_string(b.shape()));
    }
}

void require_rank(const Var& a, int rank, const char* op) {
    if (a.value().rank() != rank) {
        throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                                    shape_string(a.shape()));
    }
}

void accumulate(Node& into, const Tensor& g, double factor = 1.0) {
    if (!into.requires_grad) {
        return;
    }
    Tensor& buf = into.grad_buffer();
    for (std::size_t i = 0; i < buf.size(); ++i) {
        buf[i] += factor * g[i];
    }
}

struct ConvGeometry {
    int n, c, t, h, w;
    int o, kt, k;
    int st, ss, pt, ps;
    int to, ho, wo;

    int rows() const { return c * kt * k * k; }
    int cols() const { return to * ho * wo; }
};

void vol2col(const double* x, const ConvGeometry& g, double* col) {
    const int cols = g.cols();
    for (int ci = 0; ci < g.c; ++ci) {
        for (int a = 0; a < g.kt; ++a) {
            for (int ky = 0; ky < g.k; ++ky) {
                for (int kx = 0; kx < g.k; ++kx) {
                    const int r = ((ci * g.kt + a) * g.k + ky) * g.k + kx;
                    double* dst = col + static_cast<std::ptrdiff_t>(r) * cols;
                    for (int tt = 0; tt < g.to; ++tt) {
                        const int ti = tt * g.st - g.pt + a;
                        for (int yy = 0; yy < g.ho; ++yy) {
                            const int yi = yy * g.ss - g.ps + ky;
                            double* row = dst + (tt * g.ho + yy) * g.wo;
                            if (ti < 0 || ti >= g.t || yi < 0 || yi >= g.h) {
                                std::fill(row, row + g.wo, 0.0);
                                continue;
                            }
                            const double* src = x + ((static_cast<std::ptrdiff_t>(ci) * g.t + ti) * g.h + yi) * g.w;
                            for (int xx = 0; xx < g.wo; ++xx) {
                                const int xi = xx * g.ss - g.ps + kx;
                                row[xx] = (xi >= 0 && xi < g.w) ? src[xi] : 0.0;
                            }
                        }
                    }
                }
            }
        }
    }
}

void col2vol(const double* col, const ConvGeometry& g, double* x) {
    const int cols = g.cols();
    for (int ci = 0; ci < g.c; ++ci) {
        for (int a = 0; a < g.kt; ++a) {
            for (int ky = 0; ky < g.k; ++ky) {
                for (int kx = 0; kx < g.k; ++kx) {
                    const int r = ((ci * g.kt + a) * g.k + ky) * g.k + kx;
                    const double* src = col + static_cast<std::ptrdiff_t>(r) * cols;
                    for (int tt = 0; tt < g.to; ++tt) {
                        const int ti = tt * g.st - g.pt + a;
                        if (ti < 0 || ti >= g.t) {
                            continue;
                        }
                        for (int yy = 0; yy < g.ho; ++yy) {
                            const int yi = yy * g.ss - g.ps + ky;
                            if (yi < 0 || yi >= g.h) {
                                continue;
                            }
                            const double* row = src + (tt * g.ho + yy) * g.wo;
                            double* dst = x + ((static_cast<std::ptrdiff_t>(ci) * g.t + ti) * g.h + yi) * g.w;
                            for (int xx = 0; xx < g.wo; ++xx) {
                                const int xi = xx * g.ss - g.ps + kx;
                                if (xi >= 0 && xi < g.w) {
                                    dst[xi] += row[xx];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

Var conv_impl(const Var& x, const Var& weight, const Var& bias, ConvGeometry g, const Shape& out_shape) {
    if (g.to <= 0 || g.ho <= 0 || g.wo <= 0) {
        throw std::invalid_argument("conv: input " + shape_string(x.shape()) + " too small for kernel");
    }
    if (bias.value().size() != static_cast<std::size_t>(g.o)) {
        throw std::invalid_argument("conv: bias size does not match output channels");
    }
    const int rows = g.rows();
    const int cols = g.cols();
    const std::size_t in_stride = static_cast<std::size_t>(g.c) * g.t * g.h * g.w;
    const std::size_t out_stride = static_cast<std::size_t>(g.o) * cols;
    const std::size_t col_size = static_cast<std::size_t>(rows) * cols;

    const bool pointwise = g.kt == 1 && g.k == 1 && g.st == 1 && g.ss == 1 && g.pt == 0 && g.ps == 0;
    // Without a tape a single column buffer is reused across the batch.
    const bool keep_cols = grad_enabled();
    auto cols_cache = std::make_shared<AlignedVector>(pointwise ? 0 : col_size * (keep_cols ? g.n : 1));

    Tensor out(out_shape);
    ConstMapMat wmat(weight.value().data(), g.o, rows);
    Eigen::Map<const Eigen::VectorXd> bvec(bias.value().data(), g.o);
    for (int n = 0; n < g.n; ++n) {
        const double* xin = x.value().data() + n * in_stride;
        const double* colp = xin;
        if (!pointwise) {
            double* c = cols_cache->data() + (keep_cols ? n * col_size : 0);
            vol2col(xin, g, c);
            colp = c;
        }
        ConstMapMat colmat(colp, rows, cols);
        MapMat y(out.data() + n * out_stride, g.o, cols);
        y.noalias() = wmat * colmat;
        y.colwise() += bvec;
    }

    return make_op(std::move(out), {x, weight, bias}, [g, cols_cache, pointwise, in_stride, out_stride, col_size](Node& self) {
        Node& xn = *self.inputs[0];
        Node& wn = *self.inputs[1];
        Node& bn = *self.inputs[2];
        const int rows = g.rows();
        const int cols = g.cols();
        ConstMapMat wmat(wn.value.data(), g.o, rows);
        AlignedVector gcol(xn.requires_grad && !pointwise ? col_size : 0);
        for (int n = 0; n < g.n; ++n) {
            ConstMapMat gy(self.grad.data() + n * out_stride, g.o, cols);
            const double* colp = pointwise ? xn.value.data() + n * in_stride : cols_cache->data() + n * col_size;
            ConstMapMat colmat(colp, rows, cols);
            if (wn.requires_grad) {
                MapMat gw(wn.grad_buffer().data(), g.o, rows);
                gw.noalias() += gy * colmat.transpose();
            }
            if (bn.requires_grad) {
                Eigen::Map<Eigen::VectorXd> gb(bn.grad_buffer().data(), g.o);
                gb += gy.rowwise().sum();
            }
            if (xn.requires_grad) {
                double* gx = xn.grad_buffer().data() + n * in_stride;
                if (pointwise) {
                    MapMat gxm(gx, rows, cols);
                    gxm.noalias() += wmat.transpose() * gy;
                } else {
                    MapMat gc(gcol.data(), rows, cols);
                    gc.noalias() = wmat.transpose() * gy;
                    col2vol(gcol.data(), g, gx);
                }
            }
        }
    });
}

}  // namespace

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.value()[i] + b.value()[i];
    }
    return make_op(std::move(out), {a, b}, [](Node& self) {
        accumulate(*self.inputs[0], self.grad);
        accumulate(*self.inputs[1], self.grad);
    });
}

Var scale(const Var& a, double factor) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = factor * a.value()[i];
    }
    return make_op(std::move(out), {a}, [factor](Node& self) { accumulate(*self.inputs[0], self.grad, factor); });
}

Var sum(const Var& a) {
    double total = 0.0;
    for (double v : a.value().values()) {
        total += v;
    }
    return make_op(Tensor::scalar(total), {a}, [](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        const double g = self.grad[0];
        for (double& v : in.grad_buffer().values()) {
            v += g;
        }
    });
}

Var relu(const Var& a) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::max(a.value()[i], 0.0);
    }
    return make_op(std::move(out), {a}, [](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        Tensor& g = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (in.value[i] > 0.0) {
                g[i] += self.grad[i];
            }
        }
    });
}

Var sigmoid_probability(const Var& logits, double eps) {
    Tensor out(logits.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double z = logits.value()[i];
        const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        out[i] = std::clamp(s, eps, 1.0 - eps);
    }
    return make_op(std::move(out), {logits}, [eps](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        Tensor& g = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double p = self.value[i];
            if (p > eps && p < 1.0 - eps) {
                g[i] += self.grad[i] * p * (1.0 - p);
            }
        }
    });
}

Var reshape(const Var& a, Shape shape) {
    Tensor out = a.value().reshaped(std::move(shape));
    return make_op(std::move(out), {a}, [](Node& self) { accumulate(*self.inputs[0], self.grad); });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
    require_rank(x, 2, "linear");
    require_rank(weight, 2, "linear");
    const int n = x.value().dim(0);
    const int f = x.value().dim(1);
    const int o = weight.value().dim(0);
    if (weight.value().dim(1) != f || bias.value().size() != static_cast<std::size_t>(o)) {
        throw std::invalid_argument("linear: weight " + shape_string(weight.shape()) + " incompatible with input " +
                                    shape_string(x.shape()));
    }
    Tensor out(Shape{n, o});
    if (n > 0) {
        ConstMapMat xm(x.value().data(), n, f);
        ConstMapMat wm(weight.value().data(), o, f);
        MapMat y(out.data(), n, o);
        y.noalias() = xm * wm.transpose();
        Eigen::Map<const Eigen::RowVectorXd> b(bias.value().data(), o);
        y.rowwise() += b;
    }
    return make_op(std::move(out), {x, weight, bias}, [n, f, o](Node& self) {
        if (n == 0) {
            return;
        }
        Node& xn = *self.inputs[0];
        Node& wn = *self.inputs[1];
        Node& bn = *self.inputs[2];
        ConstMapMat gy(self.grad.data(), n, o);
        if (wn.requires_grad) {
            MapMat gw(wn.grad_buffer().data(), o, f);
            gw.noalias() += gy.transpose() * ConstMapMat(xn.value.data(), n, f);
        }
        if (bn.requires_grad) {
            Eigen::Map<Eigen::RowVectorXd> gb(bn.grad_buffer().data(), o);
            gb += gy.colwise().sum();
        }
        if (xn.requires_grad) {
            MapMat gx(xn.grad_buffer().data(), n, f);
            gx.noalias() += gy * ConstMapMat(wn.value.data(), o, f);
        }
    });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
    require_rank(x, 4, "conv2d");
    require_rank(weight, 4, "conv2d");
    const Shape& xs = x.shape();
    const Shape& ws = weight.shape();
    if (ws[1] != xs[1] || ws[2] != ws[3]) {
        throw std::invalid_argument("conv2d: weight " + shape_string(ws) + " incompatible with input " + shape_string(xs));
    }
    ConvGeometry g{xs[0], xs[1], 1, xs[2], xs[3], ws[0], 1, ws[2], 1, stride, 0, pad, 1, 0, 0};
    g.ho = (g.h + 2 * pad - g.k) / stride + 1;
    g.wo = (g.w + 2 * pad - g.k) / stride + 1;
    return conv_impl(x, weight, bias, g, Shape{g.n, g.o, g.ho, g.wo});
}

Var conv3d(const Var& x, const Var& weight, const Var& bias, int stride_t, int stride_s, int pad_t, int pad_s) {
    require_rank(x, 5, "conv3d");
    require_rank(weight, 5, "conv3d");
    const Shape& xs = x.shape();
    const Shape& ws = weight.shape();
    if (ws[1] != xs[1] || ws[3] != ws[4]) {
        throw std::invalid_argument("conv3d: weight " + shape_string(ws) + " incompatible with input " + shape_string(xs));
    }
    ConvGeometry g{xs[0], xs[1], xs[2], xs[3], xs[4], ws[0], ws[2], ws[3], stride_t, stride_s, pad_t, pad_s, 0, 0, 0};
    g.to = (g.t + 2 * pad_t - g.kt) / stride_t + 1;
    g.ho = (g.h + 2 * pad_s - g.k) / stride_s + 1;
    g.wo = (g.w + 2 * pad_s - g.k) / stride_s + 1;
    return conv_impl(x, weight, bias, g, Shape{g.n, g.o, g.to, g.ho, g.wo});
}

Var temporal_mean(const Var& x) {
    require_rank(x, 5, "temporal_mean");
    const Shape& s = x.shape();
    const int n = s[0], c = s[1], t = s[2], hw = s[3] * s[4];
    Tensor out(Shape{n, c, s[3], s[4]});
    for (int nc = 0; nc < n * c; ++nc) {
        const double* src = x.value().data() + static_cast<std::ptrdiff_t>(nc) * t * hw;
        double* dst = out.data() + static_cast<std::ptrdiff_t>(nc) * hw;
        for (int i = 0; i < hw; ++i) {
            double acc = 0.0;
            for (int k = 0; k < t; ++k) {
                acc += src[k * hw + i];
            }
            dst[i] = acc / t;
        }
    }
    return make_op(std::move(out), {x}, [n, c, t, hw](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        double* g = in.grad_buffer().data();
        for (int nc = 0; nc < n * c; ++nc) {
            const double* gy = self.grad.data() + static_cast<std::ptrdiff_t>(nc) * hw;
            double* gx = g + static_cast<std::ptrdiff_t>(nc) * t * hw;
            for (int k = 0; k < t; ++k) {
                for (int i = 0; i < hw; ++i) {
                    gx[k * hw + i] += gy[i] / t;
                }
            }
        }
    });
}

Var global_avg_pool(const Var& x) {
    require_rank(x, 4, "global_avg_pool");
    const Shape& s = x.shape();
    const int n = s[0], c = s[1], hw = s[2] * s[3];
    Tensor out(Shape{n, c});
    for (int nc = 0; nc < n * c; ++nc) {
        const double* src = x.value().data() + static_cast<std::ptrdiff_t>(nc) * hw;
        double acc = 0.0;
        for (int i = 0; i < hw; ++i) {
            acc += src[i];
        }
        out[static_cast<std::size_t>(nc)] = acc / hw;
    }
    return make_op(std::move(out), {x}, [n, c, hw](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        double* g = in.grad_buffer().data();
        for (int nc = 0; nc < n * c; ++nc) {
            const double gy = self.grad[static_cast<std::size_t>(nc)] / hw;
            for (int i = 0; i < hw; ++i) {
                g[static_cast<std::ptrdiff_t>(nc) * hw + i] += gy;
            }
        }
    });
}

Var gradient_reversal(const Var& x, double lambda) {
    if (!std::isfinite(lambda)) {
        throw std::invalid_argument("gradient_reversal: lambda must be finite");
    }
    return make_op(x.value(), {x}, [lambda](Node& self) { accumulate(*self.inputs[0], self.grad, -lambda); });
}

Var select_rows(const Var& x, std::span<const int> rows) {
    if (x.value().rank() < 1) {
        throw std::invalid_argument("select_rows: rank-0 input");
    }
    Shape shape = x.shape();
    const int n = shape[0];
    const std::size_t row_size = n > 0 ? x.value().size() / static_cast<std::size_t>(n) : shape_size(Shape(shape.begin() + 1, shape.end()));
    shape[0] = static_cast<int>(rows.size());
    Tensor out(shape);
    std::vector<int> idx(rows.begin(), rows.end());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || idx[r] >= n) {
            throw std::out_of_range("select_rows: row index out of range");
        }
        std::copy_n(x.value().data() + idx[r] * row_size, row_size, out.data() + r * row_size);
    }
    return make_op(std::move(out), {x}, [idx, row_size](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        double* g = in.grad_buffer().data();
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const double* src = self.grad.data() + r * row_size;
            double* dst = g + idx[r] * row_size;
            for (std::size_t i = 0; i < row_size; ++i) {
                dst[i] += src[i];
            }
        }
    });
}

namespace {

struct BilinearTap {
    int index[4];
    double weight[4];
};

BilinearTap bilinear_tap(double y, double x, int h, int w) {
    BilinearTap tap{{0, 0, 0, 0}, {0.0, 0.0, 0.0, 0.0}};
    if (y < -1.0 || y > h || x < -1.0 || x > w) {
        return tap;
    }
    y = std::max(y, 0.0);
    x = std::max(x, 0.0);
    int y0 = static_cast<int>(y);
    int x0 = static_cast<int>(x);
    int y1, x1;
    if (y0 >= h - 1) {
        y0 = y1 = h - 1;
        y = y0;
    } else {
        y1 = y0 + 1;
    }
    if (x0 >= w - 1) {
        x0 = x1 = w - 1;
        x = x0;
    } else {
        x1 = x0 + 1;
    }
    const double ly = y - y0, lx = x - x0;
    const double hy = 1.0 - ly, hx = 1.0 - lx;
    tap.index[0] = y0 * w + x0;
    tap.index[1] = y0 * w + x1;
    tap.index[2] = y1 * w + x0;
    tap.index[3] = y1 * w + x1;
    tap.weight[0] = hy * hx;
    tap.weight[1] = hy * lx;
    tap.weight[2] = ly * hx;
    tap.weight[3] = ly * lx;
    return tap;
}

}  // namespace

Var roi_align(const Var& features, std::span<const RoiRef> rois, int out_size, double spatial_scale, int sampling_ratio) {
    require_rank(features, 4, "roi_align");
    if (out_size <= 0 || sampling_ratio <= 0) {
        throw std::invalid_argument("roi_align: out_size and sampling_ratio must be positive");
    }
    const Shape& s = features.shape();
    const int n = s[0], c = s[1], h = s[2], w = s[3];
    const int num_rois = static_cast<int>(rois.size());
    const int bins = out_size * out_size;
    const int samples = sampling_ratio * sampling_ratio;

    // taps[(r * bins + bin) * samples + k]
    auto taps = std::make_shared<std::vector<BilinearTap>>(static_cast<std::size_t>(num_rois) * bins * samples);
    std::vector<int> batch(static_cast<std::size_t>(num_rois));
    for (int r = 0; r < num_rois; ++r) {
        const RoiRef& roi = rois[static_cast<std::size_t>(r)];
        if (roi.batch_index < 0 || roi.batch_index >= n) {
            throw std::out_of_range("roi_align: batch index out of range");
        }
        batch[static_cast<std::size_t>(r)] = roi.batch_index;
        const double x1 = roi.box.x1() * spatial_scale - 0.5;
        const double y1 = roi.box.y1() * spatial_scale - 0.5;
        const double bin_w = roi.box.width() * spatial_scale / out_size;
        const double bin_h = roi.box.height() * spatial_scale / out_size;
        for (int py = 0; py < out_size; ++py) {
            for (int px = 0; px < out_size; ++px) {
                for (int iy = 0; iy < sampling_ratio; ++iy) {
                    const double y = y1 + py * bin_h + (iy + 0.5) * bin_h / sampling_ratio;
                    for (int ix = 0; ix < sampling_ratio; ++ix) {
                        const double x = x1 + px * bin_w + (ix + 0.5) * bin_w / sampling_ratio;
                        (*taps)[(static_cast<std::size_t>(r) * bins + py * out_size + px) * samples +
                                iy * sampling_ratio + ix] = bilinear_tap(y, x, h, w);
                    }
                }
            }
        }
    }

    Tensor out(Shape{num_rois, c, out_size, out_size});
    const double inv = 1.0 / samples;
    for (int r = 0; r < num_rois; ++r) {
        const double* fbase = features.value().data() + static_cast<std::ptrdiff_t>(batch[r]) * c * h * w;
        for (int ch = 0; ch < c; ++ch) {
            const double* f = fbase + static_cast<std::ptrdiff_t>(ch) * h * w;
            double* dst = out.data() + (static_cast<std::ptrdiff_t>(r) * c + ch) * bins;
            for (int b = 0; b < bins; ++b) {
                double acc = 0.0;
                for (int k = 0; k < samples; ++k) {
                    const BilinearTap& t = (*taps)[(static_cast<std::size_t>(r) * bins + b) * samples + k];
                    acc += t.weight[0] * f[t.index[0]] + t.weight[1] * f[t.index[1]] + t.weight[2] * f[t.index[2]] +
                           t.weight[3] * f[t.index[3]];
                }
                dst[b] = acc * inv;
            }
        }
    }

    return make_op(std::move(out), {features}, [taps, batch, c, h, w, bins, samples, inv](Node& self) {
        Node& in = *self.inputs[0];
        if (!in.requires_grad) {
            return;
        }
        double* g = in.grad_buffer().data();
        for (std::size_t r = 0; r < batch.size(); ++r) {
            double* gbase = g + static_cast<std::ptrdiff_t>(batch[r]) * c * h * w;
            for (int ch = 0; ch < c; ++ch) {
                double* gf = gbase + static_cast<std::ptrdiff_t>(ch) * h * w;
                const double* gy = self.grad.data() + (static_cast<std::ptrdiff_t>(r) * c + ch) * bins;
                for (int b = 0; b < bins; ++b) {
                    const double v = gy[b] * inv;
                    for (int k = 0; k < samples; ++k) {
                        const BilinearTap& t = (*taps)[(r * bins + b) * samples + k];
                        for (int q = 0; q < 4; ++q) {
                            gf[t.index[q]] += t.weight[q] * v;
                        }
                    }
                }
            }
        }
    });
}

}  // namespace stda::nn
