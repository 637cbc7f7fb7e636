#include "stda/detector/dump.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stda/core/kv.hpp"

namespace stda {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    return fields;
}

template <typename T>
T parse_field(const std::string& text, const std::string& where, const char* what) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw std::runtime_error(where + ": invalid " + what + " '" + text + "'");
    }
    return value;
}

// Calls `handle(fields, where)` for each non-comment line with exactly `arity` fields.
template <typename Handler>
void for_each_record(std::istream& in, const std::string& source_name, std::size_t arity, Handler handle) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const std::string where = source_name + ":" + std::to_string(line_no);
        const auto fields = split_fields(line);
        if (fields.size() != arity) {
            throw std::runtime_error(where + ": expected " + std::to_string(arity) + " fields, found " +
                                     std::to_string(fields.size()));
        }
        try {
            handle(fields, where);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }
}

BoundingBox parse_box(const std::vector<std::string>& f, std::size_t at, const std::string& where) {
    return BoundingBox(parse_field<double>(f[at], where, "x1"), parse_field<double>(f[at + 1], where, "y1"),
                       parse_field<double>(f[at + 2], where, "x2"), parse_field<double>(f[at + 3], where, "y2"));
}

std::string box_fields(const BoundingBox& b) {
    return format_double(b.x1()) + "," + format_double(b.y1()) + "," + format_double(b.x2()) + "," +
           format_double(b.y2());
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    return in;
}

}  // namespace

void write_detections(std::ostream& out, const std::vector<Detection>& detections) {
    out << "# video_id,frame_index,class_id,score,x1,y1,x2,y2\n";
    for (const auto& d : detections) {
        out << d.video_id << ',' << d.frame_index << ',' << d.class_id << ',' << format_double(d.score) << ','
            << box_fields(d.box) << '\n';
    }
}

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& detections) {
    auto out = open_out(path);
    write_detections(out, detections);
}

std::vector<Detection> read_detections(std::istream& in, const std::string& source_name) {
    std::vector<Detection> out;
    for_each_record(in, source_name, 8, [&](const std::vector<std::string>& f, const std::string& where) {
        Detection d;
        d.video_id = parse_field<int>(f[0], where, "video_id");
        d.frame_index = parse_field<int>(f[1], where, "frame_index");
        d.class_id = parse_field<int>(f[2], where, "class_id");
        d.score = parse_field<double>(f[3], where, "score");
        d.box = parse_box(f, 4, where);
        validate(d);
        out.push_back(d);
    });
    return out;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_detections(in, path.string());
}

void write_annotations(std::ostream& out, const std::vector<GroundTruthInstance>& annotations) {
    out << "# video_id,frame_index,class_id,instance_id,x1,y1,x2,y2\n";
    for (const auto& g : annotations) {
        out << g.video_id << ',' << g.frame_index << ',' << g.class_id << ',' << g.instance_id << ','
            << box_fields(g.box) << '\n';
    }
}

void write_annotations(const std::filesystem::path& path, const std::vector<GroundTruthInstance>& annotations) {
    auto out = open_out(path);
    write_annotations(out, annotations);
}

std::vector<GroundTruthInstance> read_annotations(std::istream& in, const std::string& source_name) {
    std::vector<GroundTruthInstance> out;
    for_each_record(in, source_name, 8, [&](const std::vector<std::string>& f, const std::string& where) {
        GroundTruthInstance g;
        g.video_id = parse_field<int>(f[0], where, "video_id");
        g.frame_index = parse_field<int>(f[1], where, "frame_index");
        g.class_id = parse_field<int>(f[2], where, "class_id");
        g.instance_id = parse_field<int>(f[3], where, "instance_id");
        g.box = parse_box(f, 4, where);
        if (g.frame_index < 0 || g.class_id < 0) {
            throw std::runtime_error(where + ": negative frame_index or class_id");
        }
        out.push_back(g);
    });
    return out;
}

std::vector<GroundTruthInstance> read_annotations(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_annotations(in, path.string());
}

}  // namespace stda
