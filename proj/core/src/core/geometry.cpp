#include "stda/core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stda {

BoundingBox::BoundingBox(double x1, double y1, double x2, double y2)
    : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
    if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) || !std::isfinite(y2)) {
        throw std::invalid_argument("BoundingBox: non-finite coordinate");
    }
    if (!(x1 < x2) || !(y1 < y2)) {
        throw std::invalid_argument("BoundingBox: degenerate box " + to_string());
    }
}

bool BoundingBox::inside(double image_width, double image_height) const {
    return x1_ >= 0.0 && y1_ >= 0.0 && x2_ <= image_width && y2_ <= image_height;
}

BoundingBox BoundingBox::clipped(double image_width, double image_height) const {
    return BoundingBox(std::clamp(x1_, 0.0, image_width), std::clamp(y1_, 0.0, image_height),
                       std::clamp(x2_, 0.0, image_width), std::clamp(y2_, 0.0, image_height));
}

std::string BoundingBox::to_string() const {
    std::ostringstream os;
    os << '[' << x1_ << ", " << y1_ << ", " << x2_ << ", " << y2_ << ']';
    return os.str();
}

double iou_2d(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

BoxCoder::BoxCoder(Delta weights, double max_log_scale)
    : weights_(weights), max_log_scale_(max_log_scale) {
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("BoxCoder: weights must be positive and finite");
        }
    }
}

BoxCoder::Delta BoxCoder::encode(const BoundingBox& anchor, const BoundingBox& target) const {
    const double aw = anchor.width();
    const double ah = anchor.height();
    return {weights_[0] * (target.center_x() - anchor.center_x()) / aw,
            weights_[1] * (target.center_y() - anchor.center_y()) / ah,
            weights_[2] * std::log(target.width() / aw),
            weights_[3] * std::log(target.height() / ah)};
}

BoundingBox BoxCoder::decode(const BoundingBox& anchor, const Delta& delta) const {
    for (double d : delta) {
        if (!std::isfinite(d)) {
            throw std::invalid_argument("BoxCoder::decode: non-finite delta");
        }
    }
    const double dx = delta[0] / weights_[0];
    const double dy = delta[1] / weights_[1];
    const double dw = std::min(delta[2] / weights_[2], max_log_scale_);
    const double dh = std::min(delta[3] / weights_[3], max_log_scale_);

    const double cx = anchor.center_x() + dx * anchor.width();
    const double cy = anchor.center_y() + dy * anchor.height();
    const double w = anchor.width() * std::exp(dw);
    const double h = anchor.height() * std::exp(dh);
    return BoundingBox(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
}

}  // namespace stda
