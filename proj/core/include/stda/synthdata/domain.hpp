#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stda/core/geometry.hpp"
#include "stda/core/kv.hpp"

namespace stda {

enum class BackgroundStyle { flat, noise_texture, gradient };

BackgroundStyle parse_background_style(const std::string& text);
std::string to_string(BackgroundStyle style);

using Rgb = std::array<double, 3>;  // channel intensities in [0, 1]

/// Appearance of one synthetic domain. Geometry (motion, shape, placement)
/// depends only on the seed, so two specs with the same seed render the same
/// actors and differ exactly in the appearance fields.
struct DomainSpec {
    std::string name = "source";
    BackgroundStyle background_style = BackgroundStyle::flat;
    Rgb background_color{0.15, 0.15, 0.15};
    Rgb background_color2{0.35, 0.35, 0.35};  // second endpoint of gradients and textures
    std::vector<Rgb> actor_palette{{0.9, 0.9, 0.9}};  // class c uses entry c % size
    double noise_sigma = 0.02;
    double blur_radius = 0.0;
    double contrast_scale = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
    /// Keys under `prefix`: name, background_style, background_color,
    /// background_color2, actor_palette ("r,g,b;r,g,b"), noise_sigma,
    /// blur_radius, contrast_scale, seed.
    void write(KeyValues& kv, const std::string& prefix = "domain.") const;
    static DomainSpec read(const KeyValues& kv, const std::string& prefix = "domain.");

    bool operator==(const DomainSpec&) const = default;
};

enum class Motion { linear, circular, zigzag, stationary_jitter };
enum class ShapeKind { square, disc, triangle };

std::string to_string(Motion m);
std::string to_string(ShapeKind s);

/// Classes map one-to-one onto motion patterns, identically in every domain.
constexpr int kMaxClasses = 4;
Motion motion_for_class(int class_id);

/// One actor: a shape of half-size `half_size` whose center follows a motion
/// pattern. The ground-truth box is the shape's tight bounding box.
struct SyntheticAction {
    int class_id = 0;
    Motion motion = Motion::linear;
    ShapeKind shape = ShapeKind::square;
    double half_size = 7.0;
    // linear/zigzag: start point and per-frame velocity; zigzag adds a
    // triangular wave of `amplitude` along the normal with `period` frames.
    // circular: (x0, y0) is the orbit center, `amplitude` the radius,
    // `period` frames per turn, `phase` the start angle.
    // stationary_jitter: (x0, y0) fixed, per-frame offsets in `jitter_x/y`.
    double x0 = 0.0, y0 = 0.0;
    double vx = 0.0, vy = 0.0;
    double amplitude = 0.0;
    double period = 1.0;
    double phase = 0.0;
    double jitter = 0.0;
    std::vector<double> jitter_x, jitter_y;

    std::array<double, 2> center_at(int frame) const;
    BoundingBox box_at(int frame) const;
};

/// Samples trajectory parameters so that the box stays inside the image for
/// frames [0, num_frames). Throws std::invalid_argument if the image is too
/// small for the shape and motion.
SyntheticAction sample_action(int class_id, int num_frames, int image_size, std::mt19937_64& rng);

}  // namespace stda
