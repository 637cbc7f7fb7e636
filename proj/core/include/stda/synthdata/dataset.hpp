#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stda/adaptation/trainer.hpp"
#include "stda/synthdata/generator.hpp"

namespace stda {

/// "video_NNNNN.stv"
std::string video_file_name(int index);

/// Chunked video container:
///   "STDAVID1" | u32 version | u32 dtype (1 = uint8) | u32 channels | u32 height
///   | u32 width | u32 frame count | u32 frames per chunk
///   | chunks of { u32 frames | frames x channels x height x width bytes }
void write_video(const std::filesystem::path& path, const VideoFrames& video, int frames_per_chunk = 4);
VideoFrames read_video(const std::filesystem::path& path);

/// Frames of a split: clip pixels only, annotations are never opened here.
class VideoDataset {
public:
    /// An existing directory without a manifest yields an empty dataset; a
    /// missing directory is an error.
    static VideoDataset open(const std::filesystem::path& root, Split split);

    std::size_t num_videos() const { return videos_.size(); }
    const VideoFrames& video(std::size_t i) const { return videos_[i]; }
    /// Video ids equal their index within the split.
    int clip_length() const { return clip_length_; }
    int num_classes() const { return num_classes_; }
    int image_size() const { return image_size_; }
    const KeyValues& manifest() const { return manifest_; }
    std::size_t num_clips() const { return clip_index_.size(); }
    /// (video, keyframe) of clip `i`, enumerating every frame of every video.
    std::pair<int, int> clip_position(std::size_t i) const { return clip_index_[i]; }

    /// [C, T, H, W] window whose middle frame (index T / 2) is `keyframe`;
    /// frames beyond the video edges repeat the first or last frame. Pixel
    /// values are mapped to [-0.5, 0.5].
    nn::Tensor clip(int video, int keyframe) const;

private:
    std::vector<VideoFrames> videos_;
    std::vector<std::pair<int, int>> clip_index_;
    KeyValues manifest_;
    int clip_length_ = 0;
    int num_classes_ = 0;
    int image_size_ = 0;
};

/// Annotation file of a split (<root>/<split>/annotations.txt).
std::vector<GroundTruthInstance> load_annotations(const std::filesystem::path& root, Split split);

/// Source-domain clips with keyframe boxes.
class LabeledClipDataset : public LabeledClipSource {
public:
    LabeledClipDataset(const std::filesystem::path& root, Split split);
    std::size_t size() const override { return videos_.num_clips(); }
    LabeledClip clip(std::size_t index) const override;
    const VideoDataset& videos() const { return videos_; }
    const std::vector<GroundTruthInstance>& annotations() const { return annotations_; }

private:
    VideoDataset videos_;
    std::vector<GroundTruthInstance> annotations_;
    std::vector<std::vector<std::vector<LabeledBox>>> boxes_;  // [video][frame]
};

/// Target-domain clips. Built from the video files alone.
class UnlabeledClipDataset : public UnlabeledClipSource {
public:
    UnlabeledClipDataset(const std::filesystem::path& root, Split split);
    std::size_t size() const override { return videos_.num_clips(); }
    UnlabeledClip clip(std::size_t index) const override;

private:
    VideoDataset videos_;
};

}  // namespace stda
