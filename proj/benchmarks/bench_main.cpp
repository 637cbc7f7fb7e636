#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fixtures.hpp"
#include "stda/adaptation/trainer.hpp"
#include "stda/core/geometry.hpp"
#include "stda/evaluation/ap.hpp"
#include "stda/evaluation/linking.hpp"
#include "stda/nn/layers.hpp"
#include "stda/nn/ops.hpp"

using namespace stda;

namespace {

nn::Tensor random_tensor(const nn::Shape& shape, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    nn::Tensor t(shape);
    for (double& v : t.values()) {
        v = n(rng);
    }
    return t;
}

BoundingBox random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(0, 48), size(4, 16);
    const double x = pos(rng), y = pos(rng);
    return BoundingBox(x, y, x + size(rng), y + size(rng));
}

// first encoder layer at 64x64, T=8
void BM_Conv3dForward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const nn::Conv3d conv(3, 16, 3, 3, 1, 2, rng);
    const nn::Var x = nn::Var::constant(random_tensor({2, 3, 8, 64, 64}, rng));
    nn::NoGradGuard guard;
    for (auto _ : state) {
        benchmark::DoNotOptimize(conv(x));
    }
}
BENCHMARK(BM_Conv3dForward)->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const nn::Conv3d conv(3, 16, 3, 3, 1, 2, rng);
    const nn::Var x = nn::Var::parameter(random_tensor({2, 3, 8, 64, 64}, rng));
    for (auto _ : state) {
        nn::backward(nn::sum(conv(x)));
    }
}
BENCHMARK(BM_Conv3dBackward)->Unit(benchmark::kMillisecond);

void BM_RoiAlign(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const nn::Var features = nn::Var::constant(random_tensor({4, 64, 8, 8}, rng));
    std::vector<nn::RoiRef> rois;
    for (int i = 0; i < state.range(0); ++i) {
        rois.push_back({i % 4, random_box(rng)});
    }
    nn::NoGradGuard guard;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::roi_align(features, rois, 4, 1.0 / 8.0));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RoiAlign)->Arg(16)->Arg(64);

void BM_Iou2d(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < 256; ++i) {
        boxes.push_back(random_box(rng));
    }
    for (auto _ : state) {
        double total = 0.0;
        for (std::size_t i = 1; i < boxes.size(); ++i) {
            total += iou_2d(boxes[i - 1], boxes[i]);
        }
        benchmark::DoNotOptimize(total);
    }
    state.SetItemsProcessed(state.iterations() * 255);
}
BENCHMARK(BM_Iou2d);

void BM_AveragePrecision(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::bernoulli_distribution hit(0.4);
    std::vector<bool> tp(static_cast<std::size_t>(state.range(0)));
    int positives = 0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
        tp[i] = hit(rng);
        positives += tp[i];
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(average_precision(tp, positives + 1));
    }
}
BENCHMARK(BM_AveragePrecision)->Arg(1000)->Arg(100000);

void BM_TubeLinking(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> score(0, 1);
    std::vector<std::vector<ScoredBox>> frames(static_cast<std::size_t>(state.range(0)));
    for (auto& f : frames) {
        for (int b = 0; b < 20; ++b) {
            f.push_back({random_box(rng), score(rng)});
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(best_path(frames, 1.0));
    }
}
BENCHMARK(BM_TubeLinking)->Arg(16)->Arg(128);

// one optimizer step with every module at 32x32
void BM_AdaptStep(benchmark::State& state) {
    const DomainAdaptiveModel model(testing::tiny_model_config(), 6);
    TrainConfig tc;
    tc.objective.modules = ModuleFlags::all();
    Trainer trainer(model, tc);
    const DomainBatch batch = testing::make_batch(testing::square_clips(2, 7), testing::shifted_clips(2, 8));
    int step = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(trainer.step(batch, Phase::adapt, 1e-4, step++));
    }
}
BENCHMARK(BM_AdaptStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
