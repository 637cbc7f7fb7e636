#include "stda/evaluation/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "stda/evaluation/linking.hpp"

namespace stda {

namespace {

std::string ap_value(const std::optional<double>& ap) { return ap ? format_double(*ap) : "undefined"; }

std::optional<double> read_ap(const KeyValues& kv, const std::string& key) {
    const std::string v = kv.get_string(key);
    if (v == "undefined") {
        return std::nullopt;
    }
    return kv.get_double(key);
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
    return buf;
}

}  // namespace

KeyValues MetricsReport::to_kv() const {
    KeyValues kv;
    kv.set("num_classes", static_cast<int>(frame_ap.size()));
    kv.set("frame_map", frame_map);
    kv.set("video_map", video_map);
    for (std::size_t c = 0; c < frame_ap.size(); ++c) {
        kv.set("frame_ap." + std::to_string(c), ap_value(frame_ap[c]));
    }
    for (std::size_t c = 0; c < video_ap.size(); ++c) {
        kv.set("video_ap." + std::to_string(c), ap_value(video_ap[c]));
    }
    kv.set("errors.correct", errors.correct);
    kv.set("errors.mislocalized", errors.mislocalized);
    kv.set("errors.background", errors.background);
    kv.set("errors.incorrect", errors.incorrect);
    kv.set("errors.analyzed", errors.analyzed);
    kv.set("num_detections", num_detections);
    kv.set("num_ground_truth", num_ground_truth);
    return kv;
}

MetricsReport MetricsReport::from_kv(const KeyValues& kv) {
    MetricsReport r;
    const int c = static_cast<int>(kv.get_int("num_classes"));
    r.frame_map = kv.get_double("frame_map");
    r.video_map = kv.get_double("video_map");
    for (int i = 0; i < c; ++i) {
        r.frame_ap.push_back(read_ap(kv, "frame_ap." + std::to_string(i)));
        r.video_ap.push_back(read_ap(kv, "video_ap." + std::to_string(i)));
    }
    r.errors.correct = kv.get_double("errors.correct");
    r.errors.mislocalized = kv.get_double("errors.mislocalized");
    r.errors.background = kv.get_double("errors.background");
    r.errors.incorrect = kv.get_double("errors.incorrect");
    r.errors.analyzed = static_cast<int>(kv.get_int("errors.analyzed"));
    r.num_detections = static_cast<int>(kv.get_int("num_detections", 0));
    r.num_ground_truth = static_cast<int>(kv.get_int("num_ground_truth", 0));
    return r;
}

std::string MetricsReport::to_text() const {
    std::string s = "class   frame-AP  video-AP\n";
    for (std::size_t c = 0; c < frame_ap.size(); ++c) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%5zu   %8s  %8s\n", c, frame_ap[c] ? percent(*frame_ap[c]).c_str() : "n/a",
                      video_ap[c] ? percent(*video_ap[c]).c_str() : "n/a");
        s += buf;
    }
    s += "mAP     " + percent(frame_map) + "    " + percent(video_map) + "\n\n";
    s += "error analysis over top " + std::to_string(errors.analyzed) + " detections\n";
    s += "  correct       " + percent(errors.correct) + "\n";
    s += "  mislocalized  " + percent(errors.mislocalized) + "\n";
    s += "  background    " + percent(errors.background) + "\n";
    s += "  incorrect     " + percent(errors.incorrect) + "\n";
    for (const auto& w : warnings) {
        s += "warning: " + w + "\n";
    }
    return s;
}

MetricsReport evaluate_detections(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthInstance>& gt, int num_classes,
                                  const EvalConfig& config) {
    config.validate();
    MetricsReport r;
    r.num_detections = static_cast<int>(detections.size());
    r.num_ground_truth = static_cast<int>(gt.size());

    std::vector<std::optional<double>> fap;
    for (int c = 0; c < num_classes; ++c) {
        fap.push_back(frame_ap(detections, gt, c, config.iou_threshold));
    }
    const MeanAp fm = mean_ap(fap);
    r.frame_ap = fm.per_class;
    r.frame_map = fm.mean;
    for (int c : fm.excluded) {
        r.warnings.push_back("class " + std::to_string(c) + " has no ground truth; excluded from the mean");
    }

    // Each video is linked over the frames it was annotated or detected on.
    std::map<int, std::pair<int, int>> spans;
    auto widen = [&spans](int video, int frame) {
        auto [it, inserted] = spans.try_emplace(video, frame, frame);
        if (!inserted) {
            it->second.first = std::min(it->second.first, frame);
            it->second.second = std::max(it->second.second, frame);
        }
    };
    for (const auto& g : gt) {
        widen(g.video_id, g.frame_index);
    }
    for (const auto& d : detections) {
        widen(d.video_id, d.frame_index);
    }
    const std::vector<std::pair<int, std::pair<int, int>>> span_list(spans.begin(), spans.end());
    const auto tubes = link_detections(detections, num_classes, config.link_alpha, span_list);
    const auto gt_tubes = ground_truth_tubes(gt);
    std::vector<std::optional<double>> vap;
    for (int c = 0; c < num_classes; ++c) {
        vap.push_back(video_ap(tubes, gt_tubes, c, config.iou_threshold));
    }
    const MeanAp vm = mean_ap(vap);
    r.video_ap = vm.per_class;
    r.video_map = vm.mean;

    r.errors = error_analysis(detections, gt, config.top_k_error_analysis);
    return r;
}

void write_report(const MetricsReport& report, const std::filesystem::path& stem) {
    std::filesystem::path txt = stem;
    txt += ".txt";
    std::filesystem::path kvp = stem;
    kvp += ".kv";
    std::ofstream out(txt);
    if (!out) {
        throw std::runtime_error("cannot write " + txt.string());
    }
    out << report.to_text();
    report.to_kv().save(kvp);
}

}  // namespace stda
