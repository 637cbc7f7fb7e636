#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "stda/adaptation/losses.hpp"
#include "stda/adaptation/objective.hpp"
#include "stda/adaptation/trainer.hpp"

using namespace stda;
using namespace stda::testing;

namespace {

nn::Var probs(std::vector<double> v) {
    const nn::Shape s{static_cast<int>(v.size())};
    return nn::Var::constant(nn::Tensor(s, std::move(v)));
}

std::vector<nn::Tensor> snapshot(const nn::ParameterSet& p) {
    std::vector<nn::Tensor> out;
    for (const auto& [name, v] : p.entries()) {
        out.push_back(v.value());
    }
    return out;
}

bool unchanged(const nn::ParameterSet& p, const std::vector<nn::Tensor>& before) {
    for (std::size_t i = 0; i < before.size(); ++i) {
        const auto a = p.entries()[i].second.value().values();
        const auto b = before[i].values();
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("focal loss worked example") {
    const double oracle = -std::pow(1.0 - 0.8, 2.0) * std::log(0.8);
    CHECK(std::abs(focal_domain_loss(0.8, 2.0) - oracle) <= 1e-15);
    CHECK(std::abs(focal_domain_loss(0.8, 2.0) - 0.008926) <= 1e-5);
}

TEST_CASE("focal loss with gamma 0 is binary cross-entropy") {
    for (int i = 1; i <= 100; ++i) {
        const double p = i / 101.0;
        CHECK(std::abs(focal_domain_loss(p, 0.0) - (-std::log(p))) <= 1e-7);
    }
}

TEST_CASE("focal loss is monotone and clamped") {
    double prev = INFINITY;
    for (int i = 1; i < 100; ++i) {
        const double v = focal_domain_loss(i / 100.0, 2.0);
        CHECK(v < prev);
        prev = v;
    }
    for (double p : {0.1, 0.5, 0.9}) {
        CHECK(focal_domain_loss(p, 1.0) < focal_domain_loss(p, 0.0));
        CHECK(focal_domain_loss(p, 3.0) < focal_domain_loss(p, 1.0));
    }
    CHECK(std::isfinite(focal_domain_loss(0.0, 2.0)));
    CHECK(focal_domain_loss(0.0, 0.0) == doctest::Approx(-std::log(1e-7)));
    CHECK(focal_domain_loss(1.0, 0.0) >= 0.0);
}

TEST_CASE("spatial domain loss averages per domain") {
    // two source images, one target image; p is the target-domain probability
    const std::vector<int> domains{0, 0, 1};
    const nn::Var l = spatial_domain_loss(probs({0.2, 0.4, 0.7}), domains, 2.0);
    const double oracle = 0.5 * (std::pow(0.2, 2) * -std::log(0.8) + std::pow(0.4, 2) * -std::log(0.6)) +
                          std::pow(0.3, 2) * -std::log(0.7);
    CHECK(l.item() == doctest::Approx(oracle).epsilon(1e-12));
    const std::vector<int> bad{0, 2, 1};
    CHECK_THROWS_AS(spatial_domain_loss(probs({0.2, 0.4, 0.7}), bad, 2.0), std::invalid_argument);
}

TEST_CASE("temporal image loss examples") {
    const nn::Var q = nn::Var::constant(nn::Tensor(nn::Shape{1, 2, 2}, 0.5));
    const std::vector<int> target{1};
    CHECK(std::abs(temporal_image_loss(q, target, MapReduction::sum).item() - 2.7726) <= 1e-4);
    CHECK(std::abs(temporal_image_loss(q, target, MapReduction::sum).item() - 4 * std::log(2.0)) <= 1e-12);
    CHECK(std::abs(temporal_image_loss(q, target, MapReduction::mean).item() - std::log(2.0)) <= 1e-12);

    const std::vector<int> source{0};
    CHECK(temporal_image_loss(nn::Var::constant(nn::Tensor(nn::Shape{1, 2, 2}, 1e-9)), source, MapReduction::sum).item() <
          1e-6);

    // swapping labels together with Q -> 1 - Q leaves the loss unchanged
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    nn::Tensor a(nn::Shape{2, 3, 3}), b(nn::Shape{2, 3, 3});
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = u(rng);
        b[i] = 1.0 - a[i];
    }
    const std::vector<int> d{0, 1}, swapped{1, 0};
    CHECK(temporal_image_loss(nn::Var::constant(a), d, MapReduction::sum).item() ==
          doctest::Approx(temporal_image_loss(nn::Var::constant(b), swapped, MapReduction::sum).item()).epsilon(1e-12));
    CHECK_THROWS_AS(temporal_image_loss(nn::Var::constant(a), target, MapReduction::sum), std::invalid_argument);
}

TEST_CASE("temporal instance loss examples") {
    const std::vector<int> roi_image{0, 0};
    const std::vector<int> source{0};
    const double oracle = -(std::log(0.7) + std::log(0.4));
    const nn::Var l = temporal_instance_loss(probs({0.3, 0.6}), roi_image, source);
    CHECK(std::abs(l.item() - 1.27297) <= 1e-4);
    CHECK(std::abs(l.item() - oracle) <= 1e-12);
    CHECK(temporal_instance_loss(probs({}), {}, std::vector<int>{0, 1}).item() == 0.0);
    CHECK(temporal_instance_loss(probs({1e-9, 1e-9}), roi_image, source).item() < 1e-6);
    // an image without ROIs still counts towards its domain's mean
    const std::vector<int> two_sources{0, 0};
    CHECK(temporal_instance_loss(probs({0.3, 0.6}), roi_image, two_sources).item() ==
          doctest::Approx(oracle / 2).epsilon(1e-12));
    const std::vector<int> out_of_range{0, 3};
    CHECK_THROWS_AS(temporal_instance_loss(probs({0.3, 0.6}), out_of_range, source), std::out_of_range);
}

TEST_CASE("weighted focal gradient matches finite differences") {
    std::mt19937_64 rng(2);
    const std::vector<int> labels{0, 1, 1, 0, 1};
    const std::vector<double> weights{0.5, 0.5, 1.0 / 3, 1.0, 2.0};
    for (double gamma : {0.0, 1.0, 2.0}) {
        CHECK(gradcheck({random_tensor({5}, rng)},
                        [&](const std::vector<nn::Var>& v) {
                            return weighted_focal_sum(nn::sigmoid_probability(v[0]), labels, weights, gamma);
                        },
                        rng) < 1e-6);
    }
}

TEST_CASE("module flags") {
    CHECK(ModuleFlags::parse("none") == ModuleFlags{});
    CHECK(ModuleFlags::parse("") == ModuleFlags{});
    CHECK(ModuleFlags::parse("all") == ModuleFlags::all());
    CHECK(ModuleFlags::parse("Simg, Timg").to_string() == "Timg,Simg");
    CHECK(ModuleFlags::parse("Tinst").temporal_instance);
    CHECK(ModuleFlags{}.to_string() == "none");
    CHECK_FALSE(ModuleFlags{}.any());
    CHECK_THROWS_AS(ModuleFlags::parse("Timg,Sinst"), std::invalid_argument);
    for (const char* text : {"Timg", "Tinst", "Simg", "Timg,Tinst", "Timg,Simg", "Tinst,Simg", "Timg,Tinst,Simg"}) {
        CHECK(ModuleFlags::parse(text).to_string() == text);
    }
}

TEST_CASE("objective config validation") {
    ObjectiveConfig c;
    CHECK_NOTHROW(c.validate());
    c.lambda = -0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ObjectiveConfig{};
    c.gamma = NAN;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_THROWS_AS(parse_map_reduction("max"), std::invalid_argument);
}

TEST_CASE("total objective: additivity and module isolation") {
    const DomainAdaptiveModel model(tiny_model_config(), 3);
    const DomainBatch batch = make_batch(square_clips(2, 4), shifted_clips(2, 5));
    for (const char* modules : {"none", "Timg", "Tinst", "Simg", "all"}) {
        ObjectiveConfig oc;
        oc.modules = ModuleFlags::parse(modules);
        nn::Rng rng(6);
        const Objective o = total_objective(model, batch, oc, rng);
        const LossBundle& b = o.bundle;
        CHECK(b.l_act == (b.l_rpn + b.l_cls) + b.l_reg);
        CHECK(b.l_adv == (b.l_ds + b.l_dtimg) + b.l_dtinst);
        CHECK(b.total == b.l_act + b.l_adv * b.lambda);
        CHECK((b.l_ds != 0.0) == oc.modules.spatial_image);
        CHECK((b.l_dtimg != 0.0) == oc.modules.temporal_image);
        CHECK((b.l_dtinst != 0.0) == oc.modules.temporal_instance);
    }
}

TEST_CASE("total objective requires both domains when adapting") {
    const DomainAdaptiveModel model(tiny_model_config(), 3);
    ObjectiveConfig oc;
    oc.modules = ModuleFlags::all();
    nn::Rng rng(7);
    CHECK_THROWS_AS(total_objective(model, make_batch(square_clips(2, 4), {}), oc, rng), std::invalid_argument);
    oc.modules = ModuleFlags{};
    CHECK_NOTHROW(total_objective(model, make_batch(square_clips(2, 4), {}), oc, rng));
}

TEST_CASE("lambda 0: total equals the localization loss and features get no adversarial gradient") {
    const DomainBatch batch = make_batch(square_clips(2, 8), shifted_clips(2, 9));
    auto grads = [&](const char* modules, double lambda) {
        const DomainAdaptiveModel model(tiny_model_config(), 10);
        ObjectiveConfig oc;
        oc.modules = ModuleFlags::parse(modules);
        oc.lambda = lambda;
        nn::Rng rng(11);
        const Objective o = total_objective(model, batch, oc, rng);
        CHECK(o.bundle.total == o.bundle.l_act + o.bundle.l_adv * lambda);
        nn::backward(o.total);
        std::vector<nn::Tensor> g;
        for (const auto& [name, v] : model.parameters().entries()) {
            if (name.rfind("detector.", 0) == 0) {
                g.push_back(v.has_grad() ? v.grad() : nn::Tensor(v.shape()));
            }
        }
        return std::pair{o.bundle, g};
    };
    const auto [with, g_with] = grads("all", 0.0);
    const auto [without, g_without] = grads("none", 0.0);
    CHECK(with.total == with.l_act);
    CHECK(with.l_act == without.l_act);
    REQUIRE(g_with.size() == g_without.size());
    for (std::size_t i = 0; i < g_with.size(); ++i) {
        // equal up to summation order: the adapting forward pass carries extra batch rows
        for (std::size_t k = 0; k < g_with[i].size(); ++k) {
            CHECK(std::abs(g_with[i][k] - g_without[i][k]) <= 1e-12 * std::max(1.0, std::abs(g_without[i][k])));
        }
    }
}

TEST_CASE("lambda in the reversal layer or on the loss: same feature gradients, discriminator gradients scale by lambda") {
    const DomainBatch batch = make_batch(square_clips(2, 12), shifted_clips(2, 13));
    const double lambda = 0.3;
    auto grads = [&](bool in_reversal) {
        const DomainAdaptiveModel model(tiny_model_config(), 14);
        ObjectiveConfig oc;
        oc.modules = ModuleFlags::all();
        oc.lambda = lambda;
        oc.lambda_in_reversal = in_reversal;
        nn::Rng rng(15);
        nn::backward(total_objective(model, batch, oc, rng).total);
        std::vector<std::pair<std::string, nn::Tensor>> g;
        for (const auto& [name, v] : model.parameters().entries()) {
            g.emplace_back(name, v.has_grad() ? v.grad() : nn::Tensor(v.shape()));
        }
        return g;
    };
    const auto on_loss = grads(false);
    const auto in_grl = grads(true);
    double worst = 0.0;
    for (std::size_t i = 0; i < on_loss.size(); ++i) {
        const bool discriminator = on_loss[i].first.rfind("detector.", 0) != 0;
        const double factor = discriminator ? lambda : 1.0;
        for (std::size_t k = 0; k < on_loss[i].second.size(); ++k) {
            const double a = on_loss[i].second[k];
            const double b = factor * in_grl[i].second[k];
            worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-12));
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("train config round trip") {
    TrainConfig c;
    c.objective.modules = ModuleFlags::parse("Timg,Simg");
    c.objective.map_reduction = MapReduction::mean;
    c.objective.lambda = 0.05;
    c.adapt_steps = 17;
    c.seed = 99;
    KeyValues kv;
    c.write(kv);
    const TrainConfig back = TrainConfig::read(kv);
    CHECK(back.objective.modules == c.objective.modules);
    CHECK(back.objective.map_reduction == MapReduction::mean);
    CHECK(back.objective.lambda == 0.05);
    CHECK(back.adapt_steps == 17);
    CHECK(back.seed == 99);
    kv.set("n_t", 0);
    CHECK_THROWS_AS(TrainConfig::read(kv), std::invalid_argument);
}

TEST_CASE("loss log round trip and non-finite detection") {
    StepRecord r;
    r.step = 4;
    r.phase = Phase::adapt;
    r.losses.l_rpn = 0.1;
    r.losses.l_act = 1.0 / 3.0;
    r.losses.total = 2.0 / 3.0;
    const auto path = std::filesystem::temp_directory_path() / "stda_test_loss_log.txt";
    {
        std::ofstream out(path);
        out << loss_log_header() << "\n" << format_loss_line(r) << "\n";
    }
    const auto back = read_loss_log(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].step == 4);
    CHECK(back[0].phase == Phase::adapt);
    CHECK(back[0].losses.l_act == r.losses.l_act);
    CHECK(back[0].losses.total == r.losses.total);
    std::filesystem::remove(path);

    LossBundle bad;
    bad.l_dtimg = NAN;
    CHECK_THROWS_WITH_AS(check_finite(bad, 3), doctest::Contains("l_dtimg"), std::runtime_error);
}

TEST_CASE("adaptation with no modules is pretraining continued") {
    const MemoryLabeledSource source(square_clips(6, 16));
    const MemoryUnlabeledSource target(shifted_clips(6, 17));
    TrainConfig tc;
    tc.pretrain_steps = 4;
    tc.adapt_steps = 4;
    tc.seed = 5;
    std::vector<LossBundle> pre, adapt;
    {
        const DomainAdaptiveModel model(tiny_model_config(), 18);
        Trainer(model, tc).run(Phase::pretrain, source, nullptr, [&](const StepRecord& r) { pre.push_back(r.losses); });
    }
    {
        const DomainAdaptiveModel model(tiny_model_config(), 18);
        Trainer(model, tc).run(Phase::adapt, source, &target, [&](const StepRecord& r) { adapt.push_back(r.losses); });
    }
    REQUIRE(pre.size() == 4);
    REQUIRE(adapt.size() == 4);
    for (std::size_t i = 0; i < pre.size(); ++i) {
        CHECK(pre[i].l_act == adapt[i].l_act);
        CHECK(pre[i].total == adapt[i].total);
        CHECK(adapt[i].l_adv == 0.0);
    }
}

TEST_CASE("disabled modules keep their discriminators frozen") {
    const MemoryLabeledSource source(square_clips(6, 19));
    const MemoryUnlabeledSource target(shifted_clips(6, 20));
    const DomainAdaptiveModel model(tiny_model_config(), 21);
    TrainConfig tc;
    tc.adapt_steps = 3;
    tc.objective.modules = ModuleFlags::parse("Simg");
    const ModuleFlags off{true, true, false};
    const auto before_off = snapshot(model.discriminator_parameters(off));
    const auto before_on = snapshot(model.discriminator_parameters(tc.objective.modules));
    Trainer(model, tc).run(Phase::adapt, source, &target, [](const StepRecord& r) {
        CHECK(r.losses.l_dtimg == 0.0);
        CHECK(r.losses.l_dtinst == 0.0);
        CHECK(r.losses.l_ds > 0.0);
    });
    CHECK(unchanged(model.discriminator_parameters(off), before_off));
    CHECK_FALSE(unchanged(model.discriminator_parameters(tc.objective.modules), before_on));
}

TEST_CASE("adapt phase refuses a missing target") {
    const MemoryLabeledSource source(square_clips(2, 22));
    const DomainAdaptiveModel model(tiny_model_config(), 23);
    Trainer t(model, TrainConfig{});
    CHECK_THROWS_AS(t.run(Phase::adapt, source, nullptr, {}), std::invalid_argument);
    const MemoryUnlabeledSource empty({});
    CHECK_THROWS_AS(t.run(Phase::adapt, source, &empty, {}), std::invalid_argument);
}
