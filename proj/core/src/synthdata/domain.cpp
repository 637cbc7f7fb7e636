#include "stda/synthdata/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stda {

namespace {

std::string rgb_string(const Rgb& c) {
    return format_double(c[0]) + "," + format_double(c[1]) + "," + format_double(c[2]);
}

Rgb parse_rgb(const std::string& text, const std::string& key) {
    Rgb c{};
    const auto parts = split_list(text, ',');
    if (parts.size() != 3) {
        throw std::invalid_argument(key + ": expected r,g,b");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        try {
            std::size_t used = 0;
            c[i] = std::stod(parts[i], &used);
            if (used != parts[i].size()) {
                throw std::invalid_argument(parts[i]);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument(key + ": invalid channel value '" + parts[i] + "'");
        }
    }
    return c;
}

bool valid_rgb(const Rgb& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace

BackgroundStyle parse_background_style(const std::string& text) {
    if (text == "flat") {
        return BackgroundStyle::flat;
    }
    if (text == "noise_texture") {
        return BackgroundStyle::noise_texture;
    }
    if (text == "gradient") {
        return BackgroundStyle::gradient;
    }
    throw std::invalid_argument("background_style must be flat, noise_texture or gradient, got '" + text + "'");
}

std::string to_string(BackgroundStyle style) {
    switch (style) {
        case BackgroundStyle::flat:
            return "flat";
        case BackgroundStyle::noise_texture:
            return "noise_texture";
        case BackgroundStyle::gradient:
            return "gradient";
    }
    return "flat";
}

void DomainSpec::validate() const {
    if (!valid_rgb(background_color) || !valid_rgb(background_color2)) {
        throw std::invalid_argument("domain " + name + ": background colors must lie in [0, 1]");
    }
    if (actor_palette.empty() || !std::all_of(actor_palette.begin(), actor_palette.end(), valid_rgb)) {
        throw std::invalid_argument("domain " + name + ": actor_palette needs at least one color in [0, 1]");
    }
    if (!(noise_sigma >= 0.0 && noise_sigma <= 1.0)) {
        throw std::invalid_argument("domain " + name + ": noise_sigma must be in [0, 1]");
    }
    if (!(blur_radius >= 0.0 && blur_radius <= 8.0)) {
        throw std::invalid_argument("domain " + name + ": blur_radius must be in [0, 8]");
    }
    if (!(contrast_scale > 0.0 && contrast_scale <= 4.0)) {
        throw std::invalid_argument("domain " + name + ": contrast_scale must be in (0, 4]");
    }
}

void DomainSpec::write(KeyValues& kv, const std::string& prefix) const {
    kv.set(prefix + "name", name);
    kv.set(prefix + "background_style", to_string(background_style));
    kv.set(prefix + "background_color", rgb_string(background_color));
    kv.set(prefix + "background_color2", rgb_string(background_color2));
    std::string palette;
    for (const auto& c : actor_palette) {
        palette += (palette.empty() ? "" : ";") + rgb_string(c);
    }
    kv.set(prefix + "actor_palette", palette);
    kv.set(prefix + "noise_sigma", noise_sigma);
    kv.set(prefix + "blur_radius", blur_radius);
    kv.set(prefix + "contrast_scale", contrast_scale);
    kv.set(prefix + "seed", static_cast<long long>(seed));
}

DomainSpec DomainSpec::read(const KeyValues& kv, const std::string& prefix) {
    DomainSpec d;
    d.name = kv.get_string(prefix + "name", d.name);
    d.background_style = parse_background_style(kv.get_string(prefix + "background_style", "flat"));
    if (kv.contains(prefix + "background_color")) {
        d.background_color = parse_rgb(kv.get_string(prefix + "background_color"), prefix + "background_color");
    }
    if (kv.contains(prefix + "background_color2")) {
        d.background_color2 = parse_rgb(kv.get_string(prefix + "background_color2"), prefix + "background_color2");
    }
    if (kv.contains(prefix + "actor_palette")) {
        d.actor_palette.clear();
        for (const auto& item : split_list(kv.get_string(prefix + "actor_palette"), ';')) {
            d.actor_palette.push_back(parse_rgb(item, prefix + "actor_palette"));
        }
    }
    d.noise_sigma = kv.get_double(prefix + "noise_sigma", d.noise_sigma);
    d.blur_radius = kv.get_double(prefix + "blur_radius", d.blur_radius);
    d.contrast_scale = kv.get_double(prefix + "contrast_scale", d.contrast_scale);
    const long long seed = kv.get_int(prefix + "seed", static_cast<long long>(d.seed));
    if (seed < 0) {
        throw std::invalid_argument(prefix + "seed must be non-negative");
    }
    d.seed = static_cast<std::uint64_t>(seed);
    d.validate();
    return d;
}

std::string to_string(Motion m) {
    switch (m) {
        case Motion::linear:
            return "linear";
        case Motion::circular:
            return "circular";
        case Motion::zigzag:
            return "zigzag";
        case Motion::stationary_jitter:
            return "stationary_jitter";
    }
    return "linear";
}

std::string to_string(ShapeKind s) {
    switch (s) {
        case ShapeKind::square:
            return "square";
        case ShapeKind::disc:
            return "disc";
        case ShapeKind::triangle:
            return "triangle";
    }
    return "square";
}

Motion motion_for_class(int class_id) {
    if (class_id < 0 || class_id >= kMaxClasses) {
        throw std::invalid_argument("class id " + std::to_string(class_id) + " has no motion pattern");
    }
    return static_cast<Motion>(class_id);
}

std::array<double, 2> SyntheticAction::center_at(int frame) const {
    const double t = frame;
    switch (motion) {
        case Motion::linear:
            return {x0 + vx * t, y0 + vy * t};
        case Motion::zigzag: {
            const double speed = std::hypot(vx, vy);
            const double nx = speed > 0.0 ? -vy / speed : 0.0;
            const double ny = speed > 0.0 ? vx / speed : 1.0;
            // Triangle wave in [-1, 1] starting at 0.
            const double u = t / period + 0.25;
            const double tri = 4.0 * std::abs(u - std::floor(u + 0.5)) - 1.0;
            return {x0 + vx * t + amplitude * tri * nx, y0 + vy * t + amplitude * tri * ny};
        }
        case Motion::circular: {
            const double a = phase + 2.0 * std::numbers::pi * t / period;
            return {x0 + amplitude * std::cos(a), y0 + amplitude * std::sin(a)};
        }
        case Motion::stationary_jitter: {
            const std::size_t i = static_cast<std::size_t>(frame);
            return {x0 + (i < jitter_x.size() ? jitter_x[i] : 0.0), y0 + (i < jitter_y.size() ? jitter_y[i] : 0.0)};
        }
    }
    return {x0, y0};
}

BoundingBox SyntheticAction::box_at(int frame) const {
    const auto c = center_at(frame);
    return BoundingBox(c[0] - half_size, c[1] - half_size, c[0] + half_size, c[1] + half_size);
}

SyntheticAction sample_action(int class_id, int num_frames, int image_size, std::mt19937_64& rng) {
    if (num_frames <= 0) {
        throw std::invalid_argument("sample_action: num_frames must be positive");
    }
    SyntheticAction a;
    a.class_id = class_id;
    a.motion = motion_for_class(class_id);
    a.shape = static_cast<ShapeKind>(std::uniform_int_distribution<int>(0, 2)(rng));
    a.half_size = uniform(rng, 6.0, 9.0);
    const double size = image_size;
    const double lo = a.half_size;
    const double hi = size - a.half_size;
    const double span = num_frames - 1;
    auto too_small = [&]() {
        return std::invalid_argument("image of " + std::to_string(image_size) + " px is too small for a " +
                                     to_string(a.motion) + " trajectory over " + std::to_string(num_frames) +
                                     " frames");
    };
    // Start point such that start + displacement stays inside [lo, hi] on both axes.
    auto place = [&](double dx, double dy, double margin) {
        const double x_lo = lo + margin + std::max(0.0, -dx), x_hi = hi - margin - std::max(0.0, dx);
        const double y_lo = lo + margin + std::max(0.0, -dy), y_hi = hi - margin - std::max(0.0, dy);
        if (x_lo > x_hi || y_lo > y_hi) {
            throw too_small();
        }
        a.x0 = uniform(rng, x_lo, x_hi);
        a.y0 = uniform(rng, y_lo, y_hi);
    };
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    switch (a.motion) {
        case Motion::linear: {
            const double speed = uniform(rng, 1.5, 2.5);
            a.vx = speed * std::cos(angle);
            a.vy = speed * std::sin(angle);
            place(a.vx * span, a.vy * span, 0.0);
            break;
        }
        case Motion::zigzag: {
            const double speed = uniform(rng, 0.5, 1.0);
            a.vx = speed * std::cos(angle);
            a.vy = speed * std::sin(angle);
            a.amplitude = uniform(rng, 4.0, 6.0);
            a.period = 4.0;
            place(a.vx * span, a.vy * span, a.amplitude);
            break;
        }
        case Motion::circular: {
            a.amplitude = uniform(rng, 5.0, 8.0);
            a.period = uniform(rng, 8.0, 12.0);
            a.phase = angle;
            place(0.0, 0.0, a.amplitude);
            break;
        }
        case Motion::stationary_jitter: {
            a.jitter = 1.0;
            place(0.0, 0.0, a.jitter);
            std::uniform_real_distribution<double> j(-a.jitter, a.jitter);
            for (int t = 0; t < num_frames; ++t) {
                a.jitter_x.push_back(j(rng));
                a.jitter_y.push_back(j(rng));
            }
            break;
        }
    }
    return a;
}

}  // namespace stda
