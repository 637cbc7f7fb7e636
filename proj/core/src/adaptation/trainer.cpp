#include "stda/adaptation/trainer.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stda {

namespace {

nn::Rng stream(std::uint64_t seed, std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    return nn::Rng(seq);
}

}  // namespace

Phase parse_phase(const std::string& text) {
    if (text == "pretrain") {
        return Phase::pretrain;
    }
    if (text == "adapt") {
        return Phase::adapt;
    }
    throw std::invalid_argument("mode must be 'pretrain' or 'adapt', got '" + text + "'");
}

std::string to_string(Phase phase) { return phase == Phase::pretrain ? "pretrain" : "adapt"; }

void TrainConfig::validate() const {
    objective.validate();
    if (pretrain_steps < 0 || adapt_steps < 0) {
        throw std::invalid_argument("step counts must be non-negative");
    }
    if (!(lr_pretrain > 0.0) || !(lr_adapt > 0.0)) {
        throw std::invalid_argument("learning rates must be positive");
    }
    if (n_s < 1 || n_t < 1) {
        throw std::invalid_argument("n_s and n_t must be at least 1");
    }
}

void TrainConfig::write(KeyValues& kv) const {
    kv.set("gamma", objective.gamma);
    kv.set("lambda", objective.lambda);
    kv.set("map_reduction", to_string(objective.map_reduction));
    kv.set("modules", objective.modules.to_string());
    kv.set("pretrain_steps", pretrain_steps);
    kv.set("adapt_steps", adapt_steps);
    kv.set("lr_pretrain", lr_pretrain);
    kv.set("lr_adapt", lr_adapt);
    kv.set("n_s", n_s);
    kv.set("n_t", n_t);
    kv.set("seed", static_cast<long long>(seed));
}

TrainConfig TrainConfig::read(const KeyValues& kv) {
    TrainConfig c;
    c.objective.gamma = kv.get_double("gamma", c.objective.gamma);
    c.objective.lambda = kv.get_double("lambda", c.objective.lambda);
    c.objective.map_reduction = parse_map_reduction(kv.get_string("map_reduction", "sum"));
    c.objective.modules = ModuleFlags::parse(kv.get_string("modules", "none"));
    c.pretrain_steps = static_cast<int>(kv.get_int("pretrain_steps", c.pretrain_steps));
    c.adapt_steps = static_cast<int>(kv.get_int("adapt_steps", c.adapt_steps));
    c.lr_pretrain = kv.get_double("lr_pretrain", c.lr_pretrain);
    c.lr_adapt = kv.get_double("lr_adapt", c.lr_adapt);
    c.n_s = static_cast<int>(kv.get_int("n_s", c.n_s));
    c.n_t = static_cast<int>(kv.get_int("n_t", c.n_t));
    const long long seed = kv.get_int("seed", 0);
    if (seed < 0) {
        throw std::invalid_argument("seed must be non-negative");
    }
    c.seed = static_cast<std::uint64_t>(seed);
    c.validate();
    return c;
}

std::string loss_log_header() {
    return "# step phase l_rpn l_cls l_reg l_act l_ds l_dtimg l_dtinst l_adv lambda total";
}

std::string format_loss_line(const StepRecord& r) {
    const LossBundle& b = r.losses;
    std::string line = std::to_string(r.step) + " " + to_string(r.phase);
    for (double v : {b.l_rpn, b.l_cls, b.l_reg, b.l_act, b.l_ds, b.l_dtimg, b.l_dtinst, b.l_adv, b.lambda, b.total}) {
        line += " " + format_double(v);
    }
    return line;
}

std::vector<StepRecord> read_loss_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::vector<StepRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ss(line);
        StepRecord r;
        std::string phase;
        LossBundle& b = r.losses;
        if (!(ss >> r.step >> phase >> b.l_rpn >> b.l_cls >> b.l_reg >> b.l_act >> b.l_ds >> b.l_dtimg >> b.l_dtinst >>
              b.l_adv >> b.lambda >> b.total)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed loss line");
        }
        r.phase = parse_phase(phase);
        out.push_back(r);
    }
    return out;
}

void check_finite(const LossBundle& b, int step) {
    const std::pair<const char*, double> fields[] = {{"l_rpn", b.l_rpn},     {"l_cls", b.l_cls},   {"l_reg", b.l_reg},
                                                     {"l_ds", b.l_ds},       {"l_dtimg", b.l_dtimg},
                                                     {"l_dtinst", b.l_dtinst}, {"total", b.total}};
    for (const auto& [name, value] : fields) {
        if (!std::isfinite(value)) {
            throw std::runtime_error("non-finite " + std::string(name) + " at step " + std::to_string(step));
        }
    }
}

Trainer::Trainer(const DomainAdaptiveModel& model, TrainConfig config)
    : model_(model), config_(std::move(config)), roi_rng_(stream(config_.seed, 3)), optimizer_(nn::AdamConfig{}) {
    config_.validate();
}

LossBundle Trainer::step(const DomainBatch& batch, Phase phase, double learning_rate, int step_index) {
    ObjectiveConfig oc = config_.objective;
    if (phase == Phase::pretrain) {
        oc.modules = ModuleFlags{};
    }
    const Objective obj = total_objective(model_, batch, oc, roi_rng_);
    check_finite(obj.bundle, step_index);
    nn::backward(obj.total);
    optimizer_.set_learning_rate(learning_rate);
    const auto params = model_.parameters().vars();
    optimizer_.step(params);
    model_.parameters().zero_grad();
    return obj.bundle;
}

void Trainer::run(Phase phase, const LabeledClipSource& source, const UnlabeledClipSource* target,
                  const std::function<void(const StepRecord&)>& on_step) {
    if (source.size() == 0) {
        throw std::invalid_argument("training needs a non-empty source dataset");
    }
    if (phase == Phase::adapt && (target == nullptr || target->size() == 0)) {
        throw std::invalid_argument("adaptation needs both a source and a target dataset");
    }
    nn::Rng source_rng = stream(config_.seed, 1);
    nn::Rng target_rng = stream(config_.seed, 2);
    const int steps = phase == Phase::pretrain ? config_.pretrain_steps : config_.adapt_steps;
    const double lr = phase == Phase::pretrain ? config_.lr_pretrain : config_.lr_adapt;
    std::uniform_int_distribution<std::size_t> pick_source(0, source.size() - 1);

    for (int s = 0; s < steps; ++s) {
        DomainBatch batch;
        std::vector<LabeledClip> src;
        std::vector<const nn::Tensor*> ptrs;
        for (int i = 0; i < config_.n_s; ++i) {
            src.push_back(source.clip(pick_source(source_rng)));
        }
        for (auto& c : src) {
            ptrs.push_back(&c.clip);
            batch.source_boxes.push_back(c.boxes);
        }
        batch.source_clips = stack_clips(ptrs);
        if (phase == Phase::adapt) {
            std::uniform_int_distribution<std::size_t> pick_target(0, target->size() - 1);
            std::vector<UnlabeledClip> tgt;
            for (int i = 0; i < config_.n_t; ++i) {
                tgt.push_back(target->clip(pick_target(target_rng)));
            }
            ptrs.clear();
            for (auto& c : tgt) {
                ptrs.push_back(&c.clip);
            }
            batch.target_clips = stack_clips(ptrs);
        }
        StepRecord record;
        record.step = s;
        record.phase = phase;
        record.losses = step(batch, phase, lr, s);
        if (on_step) {
            on_step(record);
        }
    }
}

}  // namespace stda
