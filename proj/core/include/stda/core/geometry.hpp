#pragma once

#include <array>
#include <string>

namespace stda {

/// Axis-aligned box in continuous pixel coordinates, corner form.
/// Area is (x2 - x1) * (y2 - y1); there is no +1 pixel convention.
class BoundingBox {
public:
    BoundingBox() = default;
    /// Throws std::invalid_argument unless x1 < x2, y1 < y2 and all values are finite.
    BoundingBox(double x1, double y1, double x2, double y2);

    double x1() const { return x1_; }
    double y1() const { return y1_; }
    double x2() const { return x2_; }
    double y2() const { return y2_; }

    double width() const { return x2_ - x1_; }
    double height() const { return y2_ - y1_; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x1_ + x2_); }
    double center_y() const { return 0.5 * (y1_ + y2_); }

    /// True if the box lies inside [0, width] x [0, height].
    bool inside(double image_width, double image_height) const;

    /// Clip to [0, width] x [0, height]. Throws if nothing with positive area remains.
    BoundingBox clipped(double image_width, double image_height) const;

    bool operator==(const BoundingBox&) const = default;

    std::string to_string() const;

private:
    double x1_ = 0.0;
    double y1_ = 0.0;
    double x2_ = 1.0;
    double y2_ = 1.0;
};

/// Intersection over union in continuous area. Symmetric, 1 for identical boxes.
double iou_2d(const BoundingBox& a, const BoundingBox& b);

/// Center/size parametrization of box regression targets with log-scaled
/// width and height. `weights` multiply (dx, dy, dw, dh) on encode and divide
/// them on decode.
class BoxCoder {
public:
    using Delta = std::array<double, 4>;

    explicit BoxCoder(Delta weights = {1.0, 1.0, 1.0, 1.0}, double max_log_scale = 4.135166556742356);

    Delta encode(const BoundingBox& anchor, const BoundingBox& target) const;
    /// Throws std::invalid_argument on non-finite deltas. Width/height deltas are
    /// clamped to `max_log_scale` before exponentiation.
    BoundingBox decode(const BoundingBox& anchor, const Delta& delta) const;

    const Delta& weights() const { return weights_; }

private:
    Delta weights_;
    double max_log_scale_;
};

}  // namespace stda
