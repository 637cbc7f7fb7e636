#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "stda/core/records.hpp"

namespace stda {

/// Detection dump: one comma-separated record per line,
///   video_id,frame_index,class_id,score,x1,y1,x2,y2
/// Lines starting with '#' are comments. Doubles are written round-trippable.
void write_detections(std::ostream& out, const std::vector<Detection>& detections);
void write_detections(const std::filesystem::path& path, const std::vector<Detection>& detections);
/// Throws std::runtime_error naming the source and line number on malformed input.
std::vector<Detection> read_detections(std::istream& in, const std::string& source_name);
std::vector<Detection> read_detections(const std::filesystem::path& path);

/// Ground-truth annotations, one record per instance per frame:
///   video_id,frame_index,class_id,instance_id,x1,y1,x2,y2
void write_annotations(std::ostream& out, const std::vector<GroundTruthInstance>& annotations);
void write_annotations(const std::filesystem::path& path, const std::vector<GroundTruthInstance>& annotations);
std::vector<GroundTruthInstance> read_annotations(std::istream& in, const std::string& source_name);
std::vector<GroundTruthInstance> read_annotations(const std::filesystem::path& path);

}  // namespace stda
