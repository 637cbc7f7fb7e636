#include "stda/evaluation/linking.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

namespace stda {

LinkedPath best_path(const std::vector<std::vector<ScoredBox>>& frames, double alpha) {
    LinkedPath out;
    if (frames.empty()) {
        return out;
    }
    for (const auto& f : frames) {
        if (f.empty()) {
            return out;
        }
    }
    const std::size_t t_count = frames.size();
    std::vector<std::vector<double>> value(t_count);
    std::vector<std::vector<int>> back(t_count);
    value[0].resize(frames[0].size());
    for (std::size_t j = 0; j < frames[0].size(); ++j) {
        value[0][j] = frames[0][j].score;
    }
    for (std::size_t t = 1; t < t_count; ++t) {
        value[t].resize(frames[t].size());
        back[t].resize(frames[t].size());
        for (std::size_t j = 0; j < frames[t].size(); ++j) {
            double best = 0.0;
            int arg = -1;
            for (std::size_t i = 0; i < frames[t - 1].size(); ++i) {
                const double v = value[t - 1][i] + alpha * iou_2d(frames[t - 1][i].box, frames[t][j].box);
                if (arg < 0 || v > best) {
                    best = v;
                    arg = static_cast<int>(i);
                }
            }
            value[t][j] = best + frames[t][j].score;
            back[t][j] = arg;
        }
    }
    int j = 0;
    for (std::size_t k = 1; k < value.back().size(); ++k) {
        if (value.back()[k] > value.back()[static_cast<std::size_t>(j)]) {
            j = static_cast<int>(k);
        }
    }
    out.value = value.back()[static_cast<std::size_t>(j)];
    out.boxes.resize(t_count);
    for (std::size_t t = t_count; t-- > 0;) {
        out.boxes[t] = j;
        if (t > 0) {
            j = back[t][static_cast<std::size_t>(j)];
        }
    }
    return out;
}

double path_value(const std::vector<std::vector<ScoredBox>>& frames, std::span<const int> path, double alpha) {
    if (path.size() != frames.size() || frames.empty()) {
        throw std::invalid_argument("path_value: path length must equal the frame count");
    }
    auto at = [&](std::size_t t) -> const ScoredBox& { return frames[t].at(static_cast<std::size_t>(path[t])); };
    double v = at(0).score;
    for (std::size_t t = 1; t < frames.size(); ++t) {
        v = (v + alpha * iou_2d(at(t - 1).box, at(t).box)) + at(t).score;
    }
    return v;
}

std::vector<ActionTube> link_tubes(std::vector<std::vector<ScoredBox>> frames, int first_frame, int class_id,
                                   double alpha) {
    std::vector<ActionTube> tubes;
    while (true) {
        const LinkedPath path = best_path(frames, alpha);
        if (path.boxes.empty()) {
            break;
        }
        std::vector<TubeFrame> tube_frames;
        double score_sum = 0.0;
        for (std::size_t t = 0; t < frames.size(); ++t) {
            const ScoredBox& b = frames[t][static_cast<std::size_t>(path.boxes[t])];
            tube_frames.push_back({first_frame + static_cast<int>(t), b.box, b.score});
            score_sum += b.score;
        }
        tubes.emplace_back(class_id, std::move(tube_frames), score_sum / static_cast<double>(frames.size()));
        for (std::size_t t = 0; t < frames.size(); ++t) {
            frames[t].erase(frames[t].begin() + path.boxes[t]);
        }
    }
    return tubes;
}

std::vector<VideoTube> link_detections(std::span<const Detection> detections, int num_classes, double alpha,
                                       const std::vector<std::pair<int, std::pair<int, int>>>& frame_spans) {
    std::map<int, std::pair<int, int>> spans;
    for (const auto& [video, span] : frame_spans) {
        spans[video] = span;
    }
    std::map<int, std::pair<int, int>> seen;
    for (const auto& d : detections) {
        auto [it, inserted] = seen.try_emplace(d.video_id, d.frame_index, d.frame_index);
        if (!inserted) {
            it->second.first = std::min(it->second.first, d.frame_index);
            it->second.second = std::max(it->second.second, d.frame_index);
        }
    }
    std::vector<VideoTube> out;
    for (const auto& [video, detected_span] : seen) {
        const auto span_it = spans.find(video);
        const auto [first, last] = span_it != spans.end() ? span_it->second : detected_span;
        const std::size_t length = static_cast<std::size_t>(last - first + 1);
        for (int c = 0; c < num_classes; ++c) {
            std::vector<std::vector<ScoredBox>> frames(length);
            for (const auto& d : detections) {
                if (d.video_id == video && d.class_id == c && d.frame_index >= first && d.frame_index <= last) {
                    frames[static_cast<std::size_t>(d.frame_index - first)].push_back({d.box, d.score});
                }
            }
            for (auto& tube : link_tubes(std::move(frames), first, c, alpha)) {
                out.push_back({video, std::move(tube)});
            }
        }
    }
    return out;
}

std::vector<VideoTube> ground_truth_tubes(std::span<const GroundTruthInstance> gt) {
    std::map<std::tuple<int, int, int>, std::vector<const GroundTruthInstance*>> groups;
    for (const auto& g : gt) {
        groups[{g.video_id, g.instance_id, g.class_id}].push_back(&g);
    }
    std::vector<VideoTube> out;
    for (auto& [key, items] : groups) {
        std::stable_sort(items.begin(), items.end(),
                         [](const auto* a, const auto* b) { return a->frame_index < b->frame_index; });
        std::vector<TubeFrame> run;
        auto flush = [&]() {
            if (!run.empty()) {
                out.push_back({std::get<0>(key), ActionTube(std::get<2>(key), std::move(run), 1.0)});
                run.clear();
            }
        };
        for (const auto* g : items) {
            if (!run.empty() && g->frame_index != run.back().frame_index + 1) {
                if (g->frame_index == run.back().frame_index) {
                    throw std::invalid_argument("ground truth instance annotated twice on one frame");
                }
                flush();
            }
            run.push_back({g->frame_index, g->box, 1.0});
        }
        flush();
    }
    return out;
}

}  // namespace stda
