#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stda/core/records.hpp"
#include "stda/synthdata/domain.hpp"

namespace stda {

struct GeneratorConfig {
    int train_videos = 48;
    int test_videos = 16;
    int video_length = 16;
    int image_size = 64;
    int clip_length = 8;
    int num_classes = 4;
    int background_every = 0;     // > 0: every n-th video of a split has no actor
    bool multi_instance = false;  // two actors of the same class per video

    void validate() const;
    void write(KeyValues& kv) const;
    static GeneratorConfig read(const KeyValues& kv);

    bool operator==(const GeneratorConfig&) const = default;
};

/// Planar 8-bit frames, index ((t * channels + c) * height + y) * width + x.
struct VideoFrames {
    int num_frames = 0;
    int channels = 3;
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    std::size_t frame_size() const { return static_cast<std::size_t>(channels) * height * width; }
    std::uint8_t at(int t, int c, int y, int x) const {
        return pixels[((static_cast<std::size_t>(t) * channels + c) * height + y) * width + x];
    }
};

struct GeneratedVideo {
    VideoFrames frames;
    std::vector<SyntheticAction> actions;
    std::vector<GroundTruthInstance> annotations;
};

enum class Split { train, test };
std::string to_string(Split s);

/// Deterministic in (spec, config, split, index). Actor geometry draws from a
/// stream keyed on the seed alone, appearance noise from separate streams.
GeneratedVideo render_video(const DomainSpec& spec, const GeneratorConfig& config, Split split, int index);

/// Class of the index-th video of a split (-1 for background-only videos).
int video_class(const GeneratorConfig& config, int index);

/// Writes <root>/manifest.txt and, per split, <root>/<split>/video_NNNNN.stv
/// plus <root>/<split>/annotations.txt. Videos are rendered on `threads`
/// workers (0 = hardware concurrency); output does not depend on it.
void generate_dataset(const DomainSpec& spec, const GeneratorConfig& config, const std::filesystem::path& root,
                      unsigned threads = 0);

}  // namespace stda
