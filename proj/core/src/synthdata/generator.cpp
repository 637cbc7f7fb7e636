#include "stda/synthdata/generator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "stda/detector/dump.hpp"
#include "stda/synthdata/dataset.hpp"

namespace stda {

namespace {

constexpr int kSupersample = 4;

std::mt19937_64 stream(std::uint64_t seed, Split split, int index, std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(split), static_cast<std::uint32_t>(index), id};
    return std::mt19937_64(seq);
}

using Plane = std::vector<double>;  // [3, H, W]

Plane render_background(const DomainSpec& spec, int size, std::mt19937_64& rng) {
    const std::size_t hw = static_cast<std::size_t>(size) * size;
    Plane bg(3 * hw);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // The blend weight field t in [0, 1] selects between the two colors.
    std::vector<double> t(hw, 0.0);
    switch (spec.background_style) {
        case BackgroundStyle::flat:
            break;
        case BackgroundStyle::gradient: {
            const double a = u(rng) * 2.0 * std::numbers::pi;
            const double dx = std::cos(a), dy = std::sin(a);
            const double half = 0.5 * size;
            const double extent = half * (std::abs(dx) + std::abs(dy));
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    const double proj = (x + 0.5 - half) * dx + (y + 0.5 - half) * dy;
                    t[static_cast<std::size_t>(y) * size + x] = 0.5 + 0.5 * proj / extent;
                }
            }
            break;
        }
        case BackgroundStyle::noise_texture: {
            // Two octaves of bilinearly interpolated value noise.
            for (const auto& [cell, weight] : {std::pair{8, 0.6}, std::pair{4, 0.4}}) {
                const int g = size / cell + 2;
                std::vector<double> grid(static_cast<std::size_t>(g) * g);
                for (auto& v : grid) {
                    v = u(rng);
                }
                for (int y = 0; y < size; ++y) {
                    for (int x = 0; x < size; ++x) {
                        const double gx = (x + 0.5) / cell, gy = (y + 0.5) / cell;
                        const int ix = static_cast<int>(gx), iy = static_cast<int>(gy);
                        const double fx = gx - ix, fy = gy - iy;
                        auto at = [&](int yy, int xx) { return grid[static_cast<std::size_t>(yy) * g + xx]; };
                        const double v = (1 - fy) * ((1 - fx) * at(iy, ix) + fx * at(iy, ix + 1)) +
                                         fy * ((1 - fx) * at(iy + 1, ix) + fx * at(iy + 1, ix + 1));
                        t[static_cast<std::size_t>(y) * size + x] += weight * v;
                    }
                }
            }
            break;
        }
    }
    for (int c = 0; c < 3; ++c) {
        const double c1 = spec.background_color[static_cast<std::size_t>(c)];
        const double c2 = spec.background_color2[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < hw; ++i) {
            bg[c * hw + i] = c1 + (c2 - c1) * t[i];
        }
    }
    return bg;
}

bool inside_shape(ShapeKind shape, double x, double y, double cx, double cy, double s) {
    switch (shape) {
        case ShapeKind::square:
            return std::abs(x - cx) <= s && std::abs(y - cy) <= s;
        case ShapeKind::disc:
            return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= s * s;
        case ShapeKind::triangle: {
            // Apex at the top center, base along the bottom edge.
            if (y < cy - s || y > cy + s) {
                return false;
            }
            return std::abs(x - cx) <= 0.5 * (y - (cy - s));
        }
    }
    return false;
}

void draw_actor(Plane& img, int size, const SyntheticAction& a, int frame, const Rgb& color) {
    const auto center = a.center_at(frame);
    const double cx = center[0], cy = center[1], s = a.half_size;
    const std::size_t hw = static_cast<std::size_t>(size) * size;
    const int x_lo = std::max(0, static_cast<int>(std::floor(cx - s)));
    const int x_hi = std::min(size - 1, static_cast<int>(std::ceil(cx + s)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(cy - s)));
    const int y_hi = std::min(size - 1, static_cast<int>(std::ceil(cy + s)));
    constexpr double samples = kSupersample * kSupersample;
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            int hits = 0;
            for (int sy = 0; sy < kSupersample; ++sy) {
                for (int sx = 0; sx < kSupersample; ++sx) {
                    hits += inside_shape(a.shape, x + (sx + 0.5) / kSupersample, y + (sy + 0.5) / kSupersample, cx,
                                         cy, s)
                                ? 1
                                : 0;
                }
            }
            if (hits == 0) {
                continue;
            }
            const double cov = hits / samples;
            const std::size_t p = static_cast<std::size_t>(y) * size + x;
            for (int c = 0; c < 3; ++c) {
                double& v = img[c * hw + p];
                v = v * (1.0 - cov) + color[static_cast<std::size_t>(c)] * cov;
            }
        }
    }
}

void gaussian_blur(Plane& img, int size, double sigma) {
    if (sigma <= 0.0) {
        return;
    }
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += k[static_cast<std::size_t>(i + r)];
    }
    for (auto& v : k) {
        v /= total;
    }
    const std::size_t hw = static_cast<std::size_t>(size) * size;
    std::vector<double> tmp(hw);
    for (int c = 0; c < 3; ++c) {
        double* ch = img.data() + c * hw;
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    acc += k[static_cast<std::size_t>(i + r)] * ch[static_cast<std::size_t>(y) * size + std::clamp(x + i, 0, size - 1)];
                }
                tmp[static_cast<std::size_t>(y) * size + x] = acc;
            }
        }
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, size - 1)) * size + x];
                }
                ch[static_cast<std::size_t>(y) * size + x] = acc;
            }
        }
    }
}

}  // namespace

void GeneratorConfig::validate() const {
    if (train_videos < 0 || test_videos < 0) {
        throw std::invalid_argument("video counts must be non-negative");
    }
    if (video_length <= 0 || clip_length <= 0) {
        throw std::invalid_argument("video_length and clip_length must be positive");
    }
    if (image_size < 16) {
        throw std::invalid_argument("image_size must be at least 16");
    }
    if (num_classes < 1 || num_classes > kMaxClasses) {
        throw std::invalid_argument("num_classes must be between 1 and " + std::to_string(kMaxClasses));
    }
    if (background_every < 0) {
        throw std::invalid_argument("background_every must be non-negative");
    }
}

void GeneratorConfig::write(KeyValues& kv) const {
    kv.set("generator.train_videos", train_videos);
    kv.set("generator.test_videos", test_videos);
    kv.set("generator.video_length", video_length);
    kv.set("generator.image_size", image_size);
    kv.set("generator.clip_length", clip_length);
    kv.set("generator.num_classes", num_classes);
    kv.set("generator.background_every", background_every);
    kv.set("generator.multi_instance", multi_instance);
}

GeneratorConfig GeneratorConfig::read(const KeyValues& kv) {
    GeneratorConfig c;
    c.train_videos = static_cast<int>(kv.get_int("generator.train_videos", c.train_videos));
    c.test_videos = static_cast<int>(kv.get_int("generator.test_videos", c.test_videos));
    c.video_length = static_cast<int>(kv.get_int("generator.video_length", c.video_length));
    c.image_size = static_cast<int>(kv.get_int("generator.image_size", c.image_size));
    c.clip_length = static_cast<int>(kv.get_int("generator.clip_length", c.clip_length));
    c.num_classes = static_cast<int>(kv.get_int("generator.num_classes", c.num_classes));
    c.background_every = static_cast<int>(kv.get_int("generator.background_every", c.background_every));
    c.multi_instance = kv.get_bool("generator.multi_instance", c.multi_instance);
    c.validate();
    return c;
}

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

int video_class(const GeneratorConfig& config, int index) {
    if (config.background_every > 0) {
        if (index % config.background_every == config.background_every - 1) {
            return -1;
        }
        index -= index / config.background_every;
    }
    return index % config.num_classes;
}

GeneratedVideo render_video(const DomainSpec& spec, const GeneratorConfig& config, Split split, int index) {
    spec.validate();
    config.validate();
    std::mt19937_64 geometry = stream(spec.seed, split, index, 1);
    std::mt19937_64 texture = stream(spec.seed, split, index, 2);
    std::mt19937_64 noise = stream(spec.seed, split, index, 3);
    const int size = config.image_size;
    const int length = config.video_length;

    GeneratedVideo out;
    const int cls = video_class(config, index);
    if (cls >= 0) {
        const int instances = config.multi_instance ? 2 : 1;
        for (int k = 0; k < instances; ++k) {
            out.actions.push_back(sample_action(cls, length, size, geometry));
        }
    }
    for (int t = 0; t < length; ++t) {
        for (std::size_t k = 0; k < out.actions.size(); ++k) {
            GroundTruthInstance g;
            g.video_id = index;
            g.frame_index = t;
            g.box = out.actions[k].box_at(t);
            g.class_id = cls;
            g.instance_id = static_cast<int>(k);
            if (!g.box.inside(size, size)) {
                throw std::logic_error("generated box leaves the image: " + g.box.to_string());
            }
            out.annotations.push_back(g);
        }
    }

    const Plane background = render_background(spec, size, texture);
    const Rgb color = spec.actor_palette[static_cast<std::size_t>(std::max(cls, 0)) % spec.actor_palette.size()];
    VideoFrames& v = out.frames;
    v.num_frames = length;
    v.channels = 3;
    v.height = size;
    v.width = size;
    v.pixels.resize(static_cast<std::size_t>(length) * v.frame_size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < length; ++t) {
        Plane img = background;
        for (const auto& a : out.actions) {
            draw_actor(img, size, a, t, color);
        }
        gaussian_blur(img, size, spec.blur_radius);
        std::uint8_t* dst = v.pixels.data() + static_cast<std::size_t>(t) * v.frame_size();
        for (std::size_t i = 0; i < img.size(); ++i) {
            double p = 0.5 + (img[i] - 0.5) * spec.contrast_scale;
            p += spec.noise_sigma * gauss(noise);
            dst[i] = static_cast<std::uint8_t>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0));
        }
    }
    return out;
}

void generate_dataset(const DomainSpec& spec, const GeneratorConfig& config, const std::filesystem::path& root,
                      unsigned threads) {
    spec.validate();
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(root);
    KeyValues manifest;
    manifest.set("format", "stda-synthetic-video");
    manifest.set("version", 1);
    spec.write(manifest);
    config.write(manifest);
    for (int c = 0; c < config.num_classes; ++c) {
        manifest.set("class." + std::to_string(c), to_string(motion_for_class(c)));
    }
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    for (Split split : {Split::train, Split::test}) {
        const int count = split == Split::train ? config.train_videos : config.test_videos;
        const std::string name = to_string(split);
        fs::create_directories(root / name);
        std::vector<std::vector<GroundTruthInstance>> annotations(static_cast<std::size_t>(count));
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&]() {
            for (int i = next++; i < count; i = next++) {
                try {
                    GeneratedVideo video = render_video(spec, config, split, i);
                    write_video(root / name / video_file_name(i), video.frames);
                    annotations[static_cast<std::size_t>(i)] = std::move(video.annotations);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < threads; ++w) {
            pool.emplace_back(worker);
        }
        worker();
        for (auto& th : pool) {
            th.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
        std::vector<GroundTruthInstance> all;
        for (auto& a : annotations) {
            all.insert(all.end(), a.begin(), a.end());
        }
        write_annotations(root / name / "annotations.txt", all);
        manifest.set(name + ".videos", count);
        for (int i = 0; i < count; ++i) {
            manifest.set(name + ".video." + video_file_name(i).substr(6, 5), video_file_name(i));
        }
    }
    manifest.save(root / "manifest.txt");
}

}  // namespace stda
