#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "gradcheck.hpp"
#include "stda/detector/dump.hpp"
#include "stda/detector/head.hpp"
#include "stda/detector/localizer.hpp"
#include "stda/encoders/checkpoint.hpp"
#include "stda/encoders/discriminators.hpp"
#include "stda/encoders/encoders.hpp"

using namespace stda;
using stda::testing::random_tensor;

namespace {

bool same_values(const nn::Tensor& a, const nn::Tensor& b) {
    return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

// Textbook greedy suppression over an explicit score ordering.
std::vector<int> reference_nms(const std::vector<BoundingBox>& boxes, const std::vector<double>& scores, double thr) {
    std::vector<int> order(boxes.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<int>(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<int> kept;
    for (int i : order) {
        bool ok = true;
        for (int k : kept) {
            ok = ok && iou_2d(boxes[i], boxes[k]) <= thr;
        }
        if (ok) {
            kept.push_back(i);
        }
    }
    return kept;
}

}  // namespace

TEST_CASE("encoder configuration invariants") {
    EncoderConfig c = EncoderConfig::desk();
    CHECK_NOTHROW(c.validate());
    CHECK(c.feature_size(64) == 8);
    CHECK(c.temporal_feature_length() == 2);
    CHECK(EncoderConfig{}.feature_size(112) == 7);
    c.clip_length = 6;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = EncoderConfig::desk();
    c.spatial_stride = 12;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = EncoderConfig::desk();
    c.tf2_channels = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    KeyValues kv;
    EncoderConfig::desk().write(kv);
    CHECK(EncoderConfig::read(kv, EncoderConfig{}) == EncoderConfig::desk());
}

TEST_CASE("spatial and temporal encoders share one grid") {
    nn::Rng rng(1);
    std::mt19937_64 data(2);
    for (auto [stride, size] : {std::pair{8, 64}, std::pair{16, 112}, std::pair{8, 40}}) {
        EncoderConfig c = EncoderConfig::desk();
        c.spatial_stride = stride;
        const SpatialEncoder sf(c, rng);
        const TemporalImageEncoder tf1(c, rng);
        const nn::Tensor clip = random_tensor({1, 3, c.clip_length, size, size}, data);
        const nn::Var s = sf(nn::Var::constant(keyframes_of(clip)));
        const nn::Var t = tf1(nn::Var::constant(clip));
        const int grid = (size + stride - 1) / stride;
        CHECK(s.shape() == nn::Shape{1, c.sf_channels, grid, grid});
        CHECK(t.shape() == nn::Shape{1, c.tf1_channels, grid, grid});
        CHECK(tf1.unflattened(nn::Var::constant(clip)).shape()[2] == c.temporal_feature_length());
    }
}

TEST_CASE("encoders are deterministic and reject malformed input") {
    const EncoderConfig c = EncoderConfig::desk();
    nn::Rng rng(3);
    const SpatialEncoder sf(c, rng);
    const TemporalImageEncoder tf1(c, rng);
    std::mt19937_64 data(4);
    const nn::Tensor clip = random_tensor({2, 3, 8, 32, 32}, data);
    CHECK(same_values(tf1(nn::Var::constant(clip)).value(), tf1(nn::Var::constant(clip)).value()));
    const nn::Tensor key = keyframes_of(clip);
    CHECK(same_values(sf(nn::Var::constant(key)).value(), sf(nn::Var::constant(key)).value()));
    CHECK_THROWS_AS(sf(nn::Var::constant(random_tensor({1, 2, 32, 32}, data))), std::invalid_argument);
    CHECK_THROWS_AS(tf1(nn::Var::constant(random_tensor({1, 3, 4, 32, 32}, data))), std::invalid_argument);
}

TEST_CASE("keyframe is the middle frame") {
    nn::Tensor clip(nn::Shape{1, 1, 8, 2, 2});
    for (int t = 0; t < 8; ++t) {
        for (int i = 0; i < 4; ++i) {
            clip[static_cast<std::size_t>(t * 4 + i)] = t;
        }
    }
    const nn::Tensor k = keyframes_of(clip);
    CHECK(k.shape() == nn::Shape{1, 1, 2, 2});
    CHECK(k[0] == 4.0);
}

TEST_CASE("temporal flattening is invariant to permuting identical frames") {
    const EncoderConfig c = EncoderConfig::desk();
    nn::Rng rng(5);
    const TemporalImageEncoder tf1(c, rng);
    std::mt19937_64 data(6);
    const nn::Tensor frame = random_tensor({3, 16, 16}, data);
    nn::Tensor clip(nn::Shape{1, 3, 8, 16, 16});
    for (int ch = 0; ch < 3; ++ch)
        for (int t = 0; t < 8; ++t)
            for (int p = 0; p < 256; ++p) {
                clip[(static_cast<std::size_t>(ch) * 8 + t) * 256 + p] = frame[static_cast<std::size_t>(ch) * 256 + p];
            }
    nn::Tensor reversed = clip;
    for (int ch = 0; ch < 3; ++ch)
        for (int t = 0; t < 8; ++t)
            for (int p = 0; p < 256; ++p) {
                reversed[(static_cast<std::size_t>(ch) * 8 + t) * 256 + p] = clip[(static_cast<std::size_t>(ch) * 8 + 7 - t) * 256 + p];
            }
    CHECK(same_values(tf1(nn::Var::constant(clip)).value(), tf1(nn::Var::constant(reversed)).value()));
}

TEST_CASE("roi pooling contracts") {
    const EncoderConfig c = EncoderConfig::desk();
    const nn::Var map = nn::Var::constant(nn::Tensor(nn::Shape{1, c.tf1_channels, 8, 8}, 2.5));
    const std::vector<nn::RoiRef> rois{{0, BoundingBox(0, 0, 64, 64)}, {0, BoundingBox(3, 4, 20, 30)},
                                       {0, BoundingBox(3, 4, 20, 30)}, {0, BoundingBox(-10, -10, 30, 90)}};
    const nn::Var pooled = roi_pool(map, rois, c, 64, 64);
    CHECK(pooled.shape() == nn::Shape{4, c.tf1_channels, c.roi_size, c.roi_size});
    for (double v : pooled.value().values()) {
        CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
    }
    const std::size_t per = pooled.value().size() / 4;
    CHECK(std::equal(pooled.value().data() + per, pooled.value().data() + 2 * per, pooled.value().data() + 2 * per));
    const std::vector<nn::RoiRef> outside{{0, BoundingBox(70, 70, 80, 80)}};
    CHECK_THROWS_AS(roi_pool(map, outside, c, 64, 64), std::invalid_argument);
}

TEST_CASE("proposal boxes are divided by the shared stride") {
    // A horizontal ramp: pooled values are feature x coordinates of the sample points.
    EncoderConfig c = EncoderConfig::desk();
    c.tf1_channels = 1;
    c.roi_size = 2;
    nn::Tensor ramp(nn::Shape{1, 1, 8, 8});
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            ramp[static_cast<std::size_t>(y * 8 + x)] = x;
        }
    const std::vector<nn::RoiRef> rois{{0, BoundingBox(16, 16, 48, 48)}};
    const nn::Var pooled = roi_pool(nn::Var::constant(ramp), rois, c, 64, 64);
    // feature span [2, 6) shifted by half a cell, bins of width 2
    CHECK(pooled.value()[0] == doctest::Approx(2.5));
    CHECK(pooled.value()[1] == doctest::Approx(4.5));
}

TEST_CASE("paper-scale instance contract: 7x7x832 pooled, 1024-wide vector") {
    EncoderConfig c;
    c.tf1_channels = 832;
    c.tf2_channels = 1024;
    c.roi_size = 7;
    nn::Rng rng(7);
    const TemporalInstanceEncoder tf2(c, rng);
    const nn::Var map = nn::Var::constant(nn::Tensor(nn::Shape{1, 832, 7, 7}, 0.1));
    const std::vector<nn::RoiRef> rois{{0, BoundingBox(10, 10, 90, 100)}};
    const nn::Var pooled = roi_pool(map, rois, c, 112, 112);
    CHECK(pooled.shape() == nn::Shape{1, 832, 7, 7});
    CHECK(tf2(pooled).shape() == nn::Shape{1, 1024});
}

TEST_CASE("instance encoder handles zero ROIs") {
    const EncoderConfig c = EncoderConfig::desk();
    nn::Rng rng(8);
    const TemporalInstanceEncoder tf2(c, rng);
    const nn::Var empty = nn::Var::constant(nn::Tensor(nn::Shape{0, c.tf1_channels, c.roi_size, c.roi_size}));
    CHECK(tf2(empty).shape() == nn::Shape{0, c.tf2_channels});
    const TemporalInstanceDiscriminator d(c.tf2_channels, DiscriminatorConfig{}, rng);
    CHECK(d(tf2(empty)).shape() == nn::Shape{0});
}

TEST_CASE("discriminator outputs are probabilities of the documented shape") {
    const EncoderConfig c = EncoderConfig::desk();
    nn::Rng rng(9);
    std::mt19937_64 data(10);
    const SpatialDiscriminator ds(c.sf_channels, DiscriminatorConfig{}, rng);
    const TemporalImageDiscriminator dt(c.tf1_channels, DiscriminatorConfig{}, rng);
    const TemporalInstanceDiscriminator di(c.tf2_channels, DiscriminatorConfig{}, rng);
    const nn::Var sf = nn::Var::constant(random_tensor({3, c.sf_channels, 8, 8}, data, 50.0));
    const nn::Var tf1 = nn::Var::constant(random_tensor({3, c.tf1_channels, 8, 8}, data, 50.0));
    const nn::Var tf2 = nn::Var::constant(random_tensor({5, c.tf2_channels}, data, 50.0));
    const nn::Var p = ds(sf), q = dt(tf1), r = di(tf2);
    CHECK(p.shape() == nn::Shape{3});
    CHECK(q.shape() == nn::Shape{3, 8, 8});
    CHECK(r.shape() == nn::Shape{5});
    for (const nn::Var* v : {&p, &q, &r}) {
        for (double x : v->value().values()) {
            CHECK(x > 0.0);
            CHECK(x < 1.0);
        }
    }
    CHECK(same_values(ds(sf).value(), p.value()));
    CHECK(same_values(dt(tf1).value(), q.value()));
    CHECK(same_values(di(tf2).value(), r.value()));
}

TEST_CASE("GRL config") {
    CHECK_THROWS_AS(GradientReversal(GrlConfig{-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(GradientReversal(GrlConfig{INFINITY}), std::invalid_argument);
    CHECK(GradientReversal(GrlConfig{0.5}).lambda() == 0.5);
}

TEST_CASE("anchors tile the grid") {
    AnchorConfig cfg;
    const auto anchors = generate_anchors(cfg, 2, 3, 8);
    REQUIRE(anchors.size() == cfg.scales.size() * 6);
    // (a, y, x) order: anchor 0 of cell (1, 2) sits at index 1 * 3 + 2
    CHECK(anchors[5].center_x() == doctest::Approx(20.0));
    CHECK(anchors[5].center_y() == doctest::Approx(12.0));
    CHECK(anchors[5].width() == doctest::Approx(cfg.scales[0]));
    AnchorConfig bad;
    bad.rpn_negative_iou = 0.8;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("nms matches greedy reference and keeps the contract") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0, 40), size(4, 20), score(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<BoundingBox> boxes;
        std::vector<double> scores;
        const int n = 1 + trial % 12;
        for (int i = 0; i < n; ++i) {
            const double x = pos(rng), y = pos(rng);
            boxes.emplace_back(x, y, x + size(rng), y + size(rng));
            scores.push_back(std::round(score(rng) * 8) / 8);  // coarse scores create ties
        }
        const auto kept = nms(boxes, scores, 0.5);
        CHECK(kept == reference_nms(boxes, scores, 0.5));
        for (std::size_t i = 1; i < kept.size(); ++i) {
            CHECK(scores[kept[i - 1]] >= scores[kept[i]]);
        }
        CHECK(nms(boxes, scores, 0.5, 1).size() == 1);
    }
}

TEST_CASE("anchor matching") {
    AnchorConfig cfg;
    const std::vector<BoundingBox> anchors{BoundingBox(0, 0, 10, 10), BoundingBox(2, 0, 12, 10),
                                           BoundingBox(30, 30, 40, 40), BoundingBox(5, 0, 15, 10)};
    const std::vector<BoundingBox> gt{BoundingBox(0, 0, 10, 10)};
    const AnchorMatch m = match_anchors(anchors, gt, cfg);
    CHECK(m.labels == std::vector<int>{1, -1, 0, -1});  // 0.667 and 0.333 fall between thresholds
    CHECK(m.matched_gt[0] == 0);
    const AnchorMatch none = match_anchors(anchors, {}, cfg);
    CHECK(none.labels == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("proposals respect clipping, NMS and the keep count") {
    AnchorConfig cfg;
    const auto anchors = generate_anchors(cfg, 4, 4, 8);
    const int a = cfg.anchors_per_location();
    std::mt19937_64 data(12);
    RpnOutput rpn{nn::Var::constant(random_tensor({1, a, 4, 4}, data, 3.0)),
                  nn::Var::constant(random_tensor({1, 4 * a, 4, 4}, data, 0.5))};
    const auto props = generate_proposals(rpn, anchors, cfg, 32, 32, 10)[0];
    CHECK(props.size() <= 10);
    CHECK_FALSE(props.empty());
    for (std::size_t i = 0; i < props.size(); ++i) {
        CHECK(props[i].box.inside(32, 32));
        if (i > 0) {
            CHECK(props[i - 1].objectness >= props[i].objectness);
        }
        for (std::size_t j = 0; j < i; ++j) {
            CHECK(iou_2d(props[i].box, props[j].box) <= cfg.nms_iou);
        }
    }
    const auto one = generate_proposals(rpn, anchors, cfg, 32, 32, 1)[0];
    REQUIRE(one.size() == 1);
    CHECK(one[0].objectness == props[0].objectness);
    CHECK(one[0].box == props[0].box);
}

TEST_CASE("rpn loss edge cases") {
    AnchorConfig cfg;
    cfg.scales = {10.0};
    const auto anchors = generate_anchors(cfg, 2, 2, 8);
    RpnOutput rpn{nn::Var::parameter(nn::Tensor(nn::Shape{1, 1, 2, 2}, 0.0)),
                  nn::Var::parameter(nn::Tensor(nn::Shape{1, 4, 2, 2}, 0.0))};
    // no ground truth: every anchor negative, BCE of logit 0 is ln 2
    const std::vector<std::vector<BoundingBox>> empty(1);
    CHECK(rpn_loss(rpn, anchors, empty, cfg).item() == doctest::Approx(std::log(2.0)));
    // ground truth equal to one anchor, zero deltas: regression adds nothing
    const std::vector<std::vector<BoundingBox>> exact{{anchors[0]}};
    CHECK(rpn_loss(rpn, anchors, exact, cfg).item() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("detection loss examples") {
    const int c = 3;
    RoiTargets t;
    t.rois = {{0, BoundingBox(0, 0, 8, 8)}};
    t.labels = {2};
    t.targets.assign(4 * c, 0.0);
    t.weights.assign(4 * c, 0.0);
    for (int k = 4; k < 8; ++k) {
        t.weights[static_cast<std::size_t>(k)] = 1.0;
    }
    HeadOutput uniform{nn::Var::constant(nn::Tensor(nn::Shape{1, c + 1}, 0.0)),
                       nn::Var::constant(nn::Tensor(nn::Shape{1, 4 * c}, 0.0))};
    const HeadLosses l = detection_loss(uniform, t, c);
    CHECK(std::abs(l.cls.item() - std::log(4.0)) <= 1e-12);
    CHECK(l.reg.item() == 0.0);

    nn::Tensor confident(nn::Shape{1, c + 1}, -50.0);
    confident[2] = 50.0;
    const HeadLosses sure = detection_loss({nn::Var::constant(confident), uniform.deltas}, t, c);
    CHECK(sure.cls.item() < 1e-12);

    t.labels = {0};
    t.weights.assign(4 * c, 0.0);
    HeadOutput off{uniform.logits, nn::Var::constant(nn::Tensor(nn::Shape{1, 4 * c}, 3.0))};
    CHECK(detection_loss(off, t, c).reg.item() == 0.0);
}

TEST_CASE("roi sampling") {
    HeadConfig cfg;
    nn::Rng rng(13);
    const std::vector<LabeledBox> gt{{BoundingBox(10, 10, 30, 30), 2}};
    std::vector<Proposal> props;
    for (int i = 0; i < 40; ++i) {
        const double o = (i % 8) * 2.0;
        props.push_back({BoundingBox(10 + o, 10, 30 + o, 30), 0.5});
    }
    RoiTargets t;
    sample_rois(1, props, gt, cfg, rng, t);
    CHECK(t.rois.size() == static_cast<std::size_t>(cfg.rois_per_image));
    int fg = 0;
    for (std::size_t i = 0; i < t.rois.size(); ++i) {
        CHECK(t.rois[i].batch_index == 1);
        const double iou = iou_2d(t.rois[i].box, gt[0].box);
        if (t.labels[i] == 3) {
            ++fg;
            CHECK(iou >= cfg.fg_iou);
        } else {
            CHECK(t.labels[i] == 0);
            CHECK(iou < cfg.fg_iou);
        }
    }
    CHECK(fg == static_cast<int>(std::lround(cfg.fg_fraction * cfg.rois_per_image)));
    CHECK(t.targets.size() == 4 * t.rois.size() * static_cast<std::size_t>(cfg.num_classes));

    // no proposals: the ground truth itself is the only foreground candidate
    RoiTargets only_gt;
    sample_rois(0, {}, gt, cfg, rng, only_gt);
    REQUIRE(only_gt.rois.size() == 1);
    CHECK(only_gt.labels[0] == 3);
}

TEST_CASE("detection post-processing") {
    HeadConfig cfg;
    cfg.num_classes = 2;
    const std::vector<BoundingBox> rois{BoundingBox(0, 0, 20, 20), BoundingBox(1, 1, 21, 21), BoundingBox(40, 40, 60, 60)};
    nn::Tensor logits(nn::Shape{3, 3}, 0.0);
    logits[0 * 3 + 1] = 4.0;
    logits[1 * 3 + 1] = 3.0;
    logits[2 * 3 + 2] = 4.0;
    const HeadOutput out{nn::Var::constant(logits), nn::Var::constant(nn::Tensor(nn::Shape{3, 8}, 0.0))};
    const auto dets = postprocess_detections(out, rois, cfg, 64, 64);
    double prev = 1.0;
    int class0 = 0;
    for (const auto& d : dets) {
        CHECK(d.score >= 0.0);
        CHECK(d.score <= prev);
        prev = d.score;
        CHECK(d.box.inside(64, 64));
        class0 += d.class_id == 0 && iou_2d(d.box, rois[0]) > 0.5;
    }
    CHECK(class0 == 1);  // the overlapping class-0 pair collapses to one

    cfg.score_threshold = 0.99;
    CHECK(postprocess_detections(out, rois, cfg, 64, 64).empty());
    CHECK(postprocess_detections({nn::Var::constant(nn::Tensor(nn::Shape{0, 3})),
                                  nn::Var::constant(nn::Tensor(nn::Shape{0, 8}))},
                                 {}, cfg, 64, 64)
              .empty());
}

TEST_CASE("localizer: determinism, additivity and detection contract") {
    ModelConfig mc;
    mc.image_size = 32;
    nn::Rng r1(14), r2(14);
    const ActionLocalizer a(mc, r1), b(mc, r2);
    nn::ParameterSet pa, pb;
    a.collect(pa, "m");
    b.collect(pb, "m");
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(same_values(pa.entries()[i].second.value(), pb.entries()[i].second.value()));
    }
    std::mt19937_64 data(15);
    const nn::Tensor clips = random_tensor({2, 3, 8, 32, 32}, data, 0.3);
    const auto d1 = a.detect(clips);
    const auto d2 = a.detect(clips);
    REQUIRE(d1.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(d1[i].size() == d2[i].size());
        for (std::size_t k = 0; k < d1[i].size(); ++k) {
            CHECK(d1[i][k].score == d2[i][k].score);
            CHECK(d1[i][k].box == d2[i][k].box);
            CHECK(d1[i][k].box.inside(32, 32));
        }
    }
}

TEST_CASE("checkpoints round-trip and reject mismatched configs") {
    const auto dir = std::filesystem::temp_directory_path() / "stda_test_ckpt";
    std::filesystem::create_directories(dir);
    ModelConfig mc;
    mc.image_size = 32;
    nn::Rng r1(16), r2(17);
    const ActionLocalizer a(mc, r1), b(mc, r2);
    nn::ParameterSet pa, pb;
    a.collect(pa, "m");
    b.collect(pb, "m");
    KeyValues meta;
    mc.write(meta);
    save_checkpoint(dir / "a.ckpt", pa, meta);
    load_checkpoint(dir / "a.ckpt", pb, meta);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(same_values(pa.entries()[i].second.value(), pb.entries()[i].second.value()));
    }
    CHECK(read_checkpoint_metadata(dir / "a.ckpt") == meta);

    ModelConfig other = mc;
    other.encoder.tf1_channels = 16;
    KeyValues other_meta;
    other.write(other_meta);
    CHECK_THROWS_AS(load_checkpoint(dir / "a.ckpt", pb, other_meta), std::runtime_error);
    nn::ParameterSet extra = pb;
    extra.add("m.extra", nn::Var::parameter(nn::Tensor(nn::Shape{1})));
    CHECK_THROWS_AS(load_checkpoint(dir / "a.ckpt", extra, meta), std::runtime_error);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt", pb, meta), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("detection and annotation dumps") {
    std::vector<Detection> dets(2);
    dets[0] = {3, 7, BoundingBox(1.25, 2, 3.1, 4), 1, 0.1 + 0.2};
    dets[1] = {4, 0, BoundingBox(0, 0, 64, 64), 0, 1.0};
    std::stringstream s;
    write_detections(s, dets);
    const auto back = read_detections(s, "mem");
    REQUIRE(back.size() == 2);
    CHECK(back[0].score == dets[0].score);
    CHECK(back[0].box == dets[0].box);
    CHECK(back[1].video_id == 4);

    std::stringstream bad("# header\n0,1,0,0.5,0,0,1,1\n0,1,0,nope,0,0,1,1\n");
    CHECK_THROWS_WITH_AS(read_detections(bad, "dets.csv"), doctest::Contains("dets.csv:3"), std::runtime_error);
    std::stringstream degenerate("0,1,0,0.5,0,0,0,1\n");
    CHECK_THROWS_WITH_AS(read_detections(degenerate, "d"), doctest::Contains("d:1"), std::runtime_error);
    std::stringstream short_line("0,1,0,0.5\n");
    CHECK_THROWS_AS(read_detections(short_line, "d"), std::runtime_error);

    std::vector<GroundTruthInstance> gt{{1, 2, BoundingBox(1, 1, 5, 5), 3, 0}};
    std::stringstream g;
    write_annotations(g, gt);
    const auto gback = read_annotations(g, "ann");
    REQUIRE(gback.size() == 1);
    CHECK(gback[0].box == gt[0].box);
    CHECK(gback[0].class_id == 3);
    std::stringstream gbad("1,2,3\n");
    CHECK_THROWS_WITH_AS(read_annotations(gbad, "ann.txt"), doctest::Contains("ann.txt:1"), std::runtime_error);
}
