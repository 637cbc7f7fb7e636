#pragma once

#include <random>
#include <vector>

#include "stda/adaptation/trainer.hpp"

namespace stda::testing {

// 32x32 clips keep model tests fast.
inline ModelConfig tiny_model_config() {
    ModelConfig mc;
    mc.image_size = 32;
    mc.head.num_classes = 2;
    return mc;
}

// A bright square on a dark clip, drifting one pixel per frame.
inline LabeledClip square_clip(int size, int frames, double x, double y, double half, int class_id,
                               std::mt19937_64& rng, double noise = 0.02) {
    std::normal_distribution<double> n(0.0, noise);
    LabeledClip out;
    out.clip = nn::Tensor(nn::Shape{3, frames, size, size});
    const std::size_t plane = static_cast<std::size_t>(size) * size;
    for (int c = 0; c < 3; ++c) {
        for (int t = 0; t < frames; ++t) {
            const double cx = x + (class_id == 0 ? t - frames / 2 : 0);
            const double cy = y + (class_id == 1 ? t - frames / 2 : 0);
            for (int py = 0; py < size; ++py) {
                for (int px = 0; px < size; ++px) {
                    const bool inside = std::abs(px + 0.5 - cx) <= half && std::abs(py + 0.5 - cy) <= half;
                    out.clip[(static_cast<std::size_t>(c) * frames + t) * plane + static_cast<std::size_t>(py) * size + px] =
                        (inside ? 0.4 : -0.35) + n(rng);
                }
            }
        }
    }
    out.boxes.push_back({BoundingBox(x - half, y - half, x + half, y + half), class_id});
    return out;
}

class MemoryLabeledSource : public LabeledClipSource {
public:
    explicit MemoryLabeledSource(std::vector<LabeledClip> clips) : clips_(std::move(clips)) {}
    std::size_t size() const override { return clips_.size(); }
    LabeledClip clip(std::size_t index) const override { return clips_.at(index); }

private:
    std::vector<LabeledClip> clips_;
};

class MemoryUnlabeledSource : public UnlabeledClipSource {
public:
    explicit MemoryUnlabeledSource(std::vector<UnlabeledClip> clips) : clips_(std::move(clips)) {}
    std::size_t size() const override { return clips_.size(); }
    UnlabeledClip clip(std::size_t index) const override { return clips_.at(index); }

private:
    std::vector<UnlabeledClip> clips_;
};

inline std::vector<LabeledClip> square_clips(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(10.0, 22.0);
    std::vector<LabeledClip> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(square_clip(32, 8, pos(rng), pos(rng), 5.0, i % 2, rng));
    }
    return out;
}

// Same motion, inverted contrast and extra noise.
inline std::vector<UnlabeledClip> shifted_clips(int count, std::uint64_t seed) {
    std::vector<UnlabeledClip> out;
    for (auto& c : square_clips(count, seed)) {
        for (double& v : c.clip.values()) {
            v = -0.8 * v;
        }
        out.push_back({std::move(c.clip)});
    }
    return out;
}

inline DomainBatch make_batch(const std::vector<LabeledClip>& src, const std::vector<UnlabeledClip>& tgt) {
    DomainBatch b;
    std::vector<const nn::Tensor*> ptrs;
    for (const auto& c : src) {
        ptrs.push_back(&c.clip);
        b.source_boxes.push_back(c.boxes);
    }
    b.source_clips = stack_clips(ptrs);
    ptrs.clear();
    for (const auto& c : tgt) {
        ptrs.push_back(&c.clip);
    }
    if (!ptrs.empty()) {
        b.target_clips = stack_clips(ptrs);
    }
    return b;
}

}  // namespace stda::testing
