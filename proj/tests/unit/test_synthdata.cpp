#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <set>

#include "stda/synthdata/dataset.hpp"
#include "stda/synthdata/domain.hpp"
#include "stda/synthdata/generator.hpp"

using namespace stda;
namespace fs = std::filesystem;

namespace {

GeneratorConfig small_config() {
    GeneratorConfig g;
    g.train_videos = 6;
    g.test_videos = 3;
    g.video_length = 10;
    g.image_size = 48;
    return g;
}

double pixel_mse(const VideoFrames& a, const VideoFrames& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
        total += d * d;
    }
    return total / static_cast<double>(a.pixels.size());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("domain spec validation and key-value round trip") {
    DomainSpec s;
    s.background_style = BackgroundStyle::noise_texture;
    s.actor_palette = {{0.1, 0.2, 0.3}, {0.9, 0.8, 0.7}};
    s.noise_sigma = 0.07;
    s.seed = 42;
    CHECK_NOTHROW(s.validate());
    KeyValues kv;
    s.write(kv);
    CHECK(DomainSpec::read(KeyValues::parse(kv.to_string())) == s);
    DomainSpec bad = s;
    bad.background_color = {1.2, 0, 0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.actor_palette.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.contrast_scale = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(parse_background_style("plaid"), std::invalid_argument);
}

TEST_CASE("class to motion is a bijection") {
    std::set<Motion> seen;
    for (int c = 0; c < kMaxClasses; ++c) {
        seen.insert(motion_for_class(c));
    }
    CHECK(seen.size() == static_cast<std::size_t>(kMaxClasses));
    CHECK_THROWS_AS(motion_for_class(kMaxClasses), std::invalid_argument);
}

TEST_CASE("sampled actors stay inside the image") {
    for (int c = 0; c < kMaxClasses; ++c) {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            std::mt19937_64 rng(seed);
            const SyntheticAction a = sample_action(c, 16, 64, rng);
            CHECK(a.motion == motion_for_class(c));
            for (int f = 0; f < 16; ++f) {
                CHECK(a.box_at(f).inside(64, 64));
            }
        }
    }
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(sample_action(0, 16, 12, rng), std::invalid_argument);
}

TEST_CASE("stationary jitter stays within its bound") {
    const int c = [] {
        for (int k = 0; k < kMaxClasses; ++k) {
            if (motion_for_class(k) == Motion::stationary_jitter) {
                return k;
            }
        }
        return -1;
    }();
    REQUIRE(c >= 0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed);
        const SyntheticAction a = sample_action(c, 16, 64, rng);
        for (int f = 0; f < 16; ++f) {
            const auto p = a.center_at(f);
            CHECK(std::abs(p[0] - a.x0) <= a.jitter);
            CHECK(std::abs(p[1] - a.y0) <= a.jitter);
        }
    }
}

TEST_CASE("rendering is deterministic and geometry ignores appearance") {
    const GeneratorConfig cfg = small_config();
    DomainSpec src;
    src.seed = 5;
    DomainSpec tgt = src;
    tgt.background_style = BackgroundStyle::gradient;
    tgt.actor_palette = {{0.2, 0.4, 0.9}};
    tgt.noise_sigma = 0.1;
    for (int i = 0; i < 4; ++i) {
        const GeneratedVideo a = render_video(src, cfg, Split::train, i);
        const GeneratedVideo b = render_video(src, cfg, Split::train, i);
        CHECK(a.frames.pixels == b.frames.pixels);
        const GeneratedVideo t = render_video(tgt, cfg, Split::train, i);
        REQUIRE(t.annotations.size() == a.annotations.size());
        for (std::size_t k = 0; k < a.annotations.size(); ++k) {
            CHECK(t.annotations[k].box == a.annotations[k].box);
            CHECK(t.annotations[k].class_id == a.annotations[k].class_id);
        }
        CHECK(a.annotations.size() == static_cast<std::size_t>(cfg.video_length));
        for (const auto& g : a.annotations) {
            CHECK(g.box.inside(cfg.image_size, cfg.image_size));
        }
    }
    CHECK(render_video(src, cfg, Split::train, 0).frames.pixels != render_video(src, cfg, Split::test, 0).frames.pixels);
}

TEST_CASE("pixel divergence grows with the number of differing appearance fields") {
    const GeneratorConfig cfg = small_config();
    DomainSpec base;
    base.seed = 9;
    std::vector<DomainSpec> steps{base};
    DomainSpec s = base;
    s.background_style = BackgroundStyle::noise_texture;
    s.background_color2 = {0.6, 0.5, 0.4};
    steps.push_back(s);
    s.actor_palette = {{0.1, 0.5, 0.9}};
    steps.push_back(s);
    s.noise_sigma = 0.12;
    steps.push_back(s);
    s.contrast_scale = 0.5;
    steps.push_back(s);
    std::vector<double> mse;
    for (const auto& spec : steps) {
        double total = 0.0;
        for (int i = 0; i < 4; ++i) {
            total += pixel_mse(render_video(base, cfg, Split::train, i).frames,
                               render_video(spec, cfg, Split::train, i).frames);
        }
        mse.push_back(total);
    }
    CHECK(mse[0] == 0.0);
    for (std::size_t i = 1; i < mse.size(); ++i) {
        CHECK(mse[i] > mse[i - 1]);
    }
}

TEST_CASE("classes are balanced") {
    for (int n : {7, 16, 48, 49}) {
        GeneratorConfig cfg;
        cfg.train_videos = n;
        std::vector<int> counts(static_cast<std::size_t>(cfg.num_classes), 0);
        for (int i = 0; i < n; ++i) {
            ++counts[static_cast<std::size_t>(video_class(cfg, i))];
        }
        for (int c : counts) {
            CHECK(std::abs(c - static_cast<double>(n) / cfg.num_classes) <= 1.0);
        }
    }
    GeneratorConfig with_bg;
    with_bg.background_every = 4;
    CHECK(video_class(with_bg, 3) == -1);
    CHECK(render_video(DomainSpec{}, [] {
              GeneratorConfig g = small_config();
              g.background_every = 1;
              return g;
          }(), Split::train, 0)
              .annotations.empty());
}

TEST_CASE("multi-instance videos carry two actors of one class") {
    GeneratorConfig cfg = small_config();
    cfg.multi_instance = true;
    const GeneratedVideo v = render_video(DomainSpec{}, cfg, Split::train, 1);
    CHECK(v.annotations.size() == 2 * static_cast<std::size_t>(cfg.video_length));
    for (const auto& g : v.annotations) {
        CHECK(g.class_id == v.annotations.front().class_id);
    }
}

TEST_CASE("video container round trip and corruption") {
    TempDir dir("stda_test_video");
    const GeneratedVideo v = render_video(DomainSpec{}, small_config(), Split::train, 2);
    write_video(dir.path / "v.stv", v.frames, 3);
    const VideoFrames back = read_video(dir.path / "v.stv");
    CHECK(back.pixels == v.frames.pixels);
    CHECK(back.num_frames == v.frames.num_frames);
    std::string bytes = slurp(dir.path / "v.stv");
    bytes.resize(bytes.size() - 10);
    std::ofstream(dir.path / "cut.stv", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_video(dir.path / "cut.stv"), std::runtime_error);
    std::ofstream(dir.path / "junk.stv", std::ios::binary) << "not a video at all, no sir";
    CHECK_THROWS_AS(read_video(dir.path / "junk.stv"), std::runtime_error);
}

TEST_CASE("generated datasets: determinism, thread independence, loading") {
    TempDir dir("stda_test_dataset");
    DomainSpec spec;
    spec.seed = 3;
    const GeneratorConfig cfg = small_config();
    generate_dataset(spec, cfg, dir.path / "a", 1);
    generate_dataset(spec, cfg, dir.path / "b", 3);
    for (const auto& entry : fs::recursive_directory_iterator(dir.path / "a")) {
        if (entry.is_regular_file()) {
            const fs::path twin = dir.path / "b" / fs::relative(entry.path(), dir.path / "a");
            CHECK(slurp(entry.path()) == slurp(twin));
        }
    }

    const LabeledClipDataset labeled(dir.path / "a", Split::train);
    CHECK(labeled.size() == static_cast<std::size_t>(cfg.train_videos * cfg.video_length));
    // every annotation survives the text round trip exactly
    std::size_t k = 0;
    for (int i = 0; i < cfg.train_videos; ++i) {
        for (const auto& g : render_video(spec, cfg, Split::train, i).annotations) {
            REQUIRE(k < labeled.annotations().size());
            CHECK(labeled.annotations()[k].box == g.box);
            CHECK(labeled.annotations()[k].class_id == g.class_id);
            ++k;
        }
    }
    CHECK(k == labeled.annotations().size());

    const LabeledClip c = labeled.clip(0);
    CHECK(c.clip.shape() == nn::Shape{3, cfg.clip_length, cfg.image_size, cfg.image_size});
    CHECK(c.boxes.size() == 1);
    for (double v : c.clip.values()) {
        CHECK(v >= -0.5);
        CHECK(v <= 0.5);
    }

    // the keyframe sits at T / 2; early keyframes repeat frame 0
    const VideoDataset& videos = labeled.videos();
    const nn::Tensor w = videos.clip(0, 0);
    const std::size_t plane = static_cast<std::size_t>(cfg.image_size) * cfg.image_size;
    CHECK(w[static_cast<std::size_t>(cfg.clip_length / 2) * plane] == videos.video(0).at(0, 0, 0, 0) / 255.0 - 0.5);
    CHECK(w[0] == w[static_cast<std::size_t>(cfg.clip_length / 2) * plane]);
    CHECK_THROWS_AS(videos.clip(0, cfg.video_length), std::out_of_range);

    // target loading never needs the annotation file
    fs::remove(dir.path / "a" / "train" / "annotations.txt");
    const UnlabeledClipDataset unlabeled(dir.path / "a", Split::train);
    CHECK(unlabeled.size() == labeled.size());
    CHECK_THROWS(LabeledClipDataset(dir.path / "a", Split::train));

    std::ofstream(dir.path / "a" / "train" / "annotations.txt") << "0,0,0,0,1,1,5,5\n0,0,zero,0,1,1,5,5\n";
    CHECK_THROWS_WITH(LabeledClipDataset(dir.path / "a", Split::train), doctest::Contains(":2"));
}

TEST_CASE("empty and missing dataset directories") {
    TempDir dir("stda_test_empty");
    fs::create_directories(dir.path / "empty");
    CHECK(UnlabeledClipDataset(dir.path / "empty", Split::train).size() == 0);
    CHECK(LabeledClipDataset(dir.path / "empty", Split::test).size() == 0);
    CHECK_THROWS_AS(VideoDataset::open(dir.path / "nowhere", Split::train), std::runtime_error);
}
