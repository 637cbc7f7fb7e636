#include "stda/synthdata/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "stda/detector/dump.hpp"

namespace stda {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'D', 'A', 'V', 'I', 'D', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kUint8 = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& where) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error(where + ": truncated header");
    }
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

std::string video_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "video_%05d.stv", index);
    return buf;
}

void write_video(const std::filesystem::path& path, const VideoFrames& v, int frames_per_chunk) {
    if (frames_per_chunk <= 0) {
        throw std::invalid_argument("write_video: frames_per_chunk must be positive");
    }
    if (v.pixels.size() != static_cast<std::size_t>(v.num_frames) * v.frame_size()) {
        throw std::invalid_argument("write_video: pixel buffer does not match dimensions");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.write(kMagic, sizeof kMagic);
    for (std::uint32_t x : {kVersion, kUint8, static_cast<std::uint32_t>(v.channels),
                            static_cast<std::uint32_t>(v.height), static_cast<std::uint32_t>(v.width),
                            static_cast<std::uint32_t>(v.num_frames), static_cast<std::uint32_t>(frames_per_chunk)}) {
        put_u32(out, x);
    }
    for (int t = 0; t < v.num_frames; t += frames_per_chunk) {
        const int n = std::min(frames_per_chunk, v.num_frames - t);
        put_u32(out, static_cast<std::uint32_t>(n));
        out.write(reinterpret_cast<const char*>(v.pixels.data() + static_cast<std::size_t>(t) * v.frame_size()),
                  static_cast<std::streamsize>(static_cast<std::size_t>(n) * v.frame_size()));
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

VideoFrames read_video(const std::filesystem::path& path) {
    const std::string where = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + where);
    }
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw std::runtime_error(where + ": not a video container");
    }
    if (get_u32(in, where) != kVersion) {
        throw std::runtime_error(where + ": unsupported container version");
    }
    if (get_u32(in, where) != kUint8) {
        throw std::runtime_error(where + ": unsupported pixel type");
    }
    VideoFrames v;
    v.channels = static_cast<int>(get_u32(in, where));
    v.height = static_cast<int>(get_u32(in, where));
    v.width = static_cast<int>(get_u32(in, where));
    v.num_frames = static_cast<int>(get_u32(in, where));
    get_u32(in, where);  // frames per chunk, informational
    if (v.channels <= 0 || v.height <= 0 || v.width <= 0 || v.num_frames < 0 || v.channels > 16 ||
        v.height > 4096 || v.width > 4096) {
        throw std::runtime_error(where + ": implausible dimensions");
    }
    v.pixels.resize(static_cast<std::size_t>(v.num_frames) * v.frame_size());
    int t = 0;
    while (t < v.num_frames) {
        const int n = static_cast<int>(get_u32(in, where));
        if (n <= 0 || t + n > v.num_frames) {
            throw std::runtime_error(where + ": bad chunk frame count");
        }
        if (!in.read(reinterpret_cast<char*>(v.pixels.data() + static_cast<std::size_t>(t) * v.frame_size()),
                     static_cast<std::streamsize>(static_cast<std::size_t>(n) * v.frame_size()))) {
            throw std::runtime_error(where + ": truncated frame data");
        }
        t += n;
    }
    return v;
}

VideoDataset VideoDataset::open(const std::filesystem::path& root, Split split) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) {
        throw std::runtime_error("dataset directory does not exist: " + root.string());
    }
    VideoDataset ds;
    if (!fs::exists(root / "manifest.txt")) {
        return ds;
    }
    ds.manifest_ = KeyValues::load(root / "manifest.txt");
    if (ds.manifest_.get_string("format", "") != "stda-synthetic-video") {
        throw std::runtime_error(root.string() + ": manifest is not a synthetic video dataset");
    }
    const GeneratorConfig gen = GeneratorConfig::read(ds.manifest_);
    ds.clip_length_ = gen.clip_length;
    ds.num_classes_ = gen.num_classes;
    ds.image_size_ = gen.image_size;
    const std::string name = to_string(split);
    const int count = static_cast<int>(ds.manifest_.get_int(name + ".videos", 0));
    for (int i = 0; i < count; ++i) {
        ds.videos_.push_back(read_video(root / name / video_file_name(i)));
        const VideoFrames& v = ds.videos_.back();
        if (v.height != gen.image_size || v.width != gen.image_size) {
            throw std::runtime_error(video_file_name(i) + ": frame size disagrees with the manifest");
        }
        for (int t = 0; t < v.num_frames; ++t) {
            ds.clip_index_.emplace_back(i, t);
        }
    }
    return ds;
}

nn::Tensor VideoDataset::clip(int video, int keyframe) const {
    const VideoFrames& v = videos_.at(static_cast<std::size_t>(video));
    if (keyframe < 0 || keyframe >= v.num_frames) {
        throw std::out_of_range("keyframe outside the video");
    }
    const int t_len = clip_length_;
    const std::size_t plane = static_cast<std::size_t>(v.height) * v.width;
    nn::Tensor out({v.channels, t_len, v.height, v.width});
    for (int k = 0; k < t_len; ++k) {
        const int src_t = std::clamp(keyframe - t_len / 2 + k, 0, v.num_frames - 1);
        for (int c = 0; c < v.channels; ++c) {
            const std::uint8_t* src = v.pixels.data() + (static_cast<std::size_t>(src_t) * v.channels + c) * plane;
            double* dst = out.data() + (static_cast<std::size_t>(c) * t_len + k) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                dst[i] = src[i] / 255.0 - 0.5;
            }
        }
    }
    return out;
}

std::vector<GroundTruthInstance> load_annotations(const std::filesystem::path& root, Split split) {
    return read_annotations(root / to_string(split) / "annotations.txt");
}

LabeledClipDataset::LabeledClipDataset(const std::filesystem::path& root, Split split)
    : videos_(VideoDataset::open(root, split)) {
    if (videos_.num_videos() == 0) {
        return;
    }
    annotations_ = load_annotations(root, split);
    boxes_.resize(videos_.num_videos());
    for (std::size_t i = 0; i < videos_.num_videos(); ++i) {
        boxes_[i].resize(static_cast<std::size_t>(videos_.video(i).num_frames));
    }
    for (const auto& g : annotations_) {
        if (g.video_id < 0 || static_cast<std::size_t>(g.video_id) >= boxes_.size() || g.frame_index < 0 ||
            static_cast<std::size_t>(g.frame_index) >= boxes_[static_cast<std::size_t>(g.video_id)].size()) {
            throw std::runtime_error("annotation refers to a missing video or frame: video " +
                                     std::to_string(g.video_id) + ", frame " + std::to_string(g.frame_index));
        }
        if (g.class_id >= videos_.num_classes()) {
            throw std::runtime_error("annotation class " + std::to_string(g.class_id) + " outside the label map");
        }
        boxes_[static_cast<std::size_t>(g.video_id)][static_cast<std::size_t>(g.frame_index)].push_back(
            {g.box, g.class_id});
    }
}

LabeledClip LabeledClipDataset::clip(std::size_t index) const {
    const auto [video, frame] = videos_.clip_position(index);
    return {videos_.clip(video, frame), boxes_[static_cast<std::size_t>(video)][static_cast<std::size_t>(frame)]};
}

UnlabeledClipDataset::UnlabeledClipDataset(const std::filesystem::path& root, Split split)
    : videos_(VideoDataset::open(root, split)) {}

UnlabeledClip UnlabeledClipDataset::clip(std::size_t index) const {
    const auto [video, frame] = videos_.clip_position(index);
    return {videos_.clip(video, frame)};
}

}  // namespace stda
