#pragma once

// The hyper-learning training loop: inner descent steps interleaved with
// agent meta-steps, epoch-boundary batch-size updates with alpha resets, and
// the baseline schedulers (constant, milestone, hybrid) plus hypergradient
// co-adaptation.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperlearn/agent.hpp"
#include "hyperlearn/common.hpp"
#include "hyperlearn/dataset.hpp"
#include "hyperlearn/model.hpp"
#include "hyperlearn/optimizer.hpp"
#include "hyperlearn/rng.hpp"
#include "hyperlearn/sampler.hpp"
#include "hyperlearn/tape.hpp"

namespace hyperlearn {

enum class SchedulerKind { constant, milestone, arbiter, hybrid, arbiter_hd };

inline bool uses_arbiter(SchedulerKind k) {
    return k == SchedulerKind::arbiter || k == SchedulerKind::hybrid ||
           k == SchedulerKind::arbiter_hd;
}

inline std::string to_string(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::constant: return "constant";
        case SchedulerKind::milestone: return "milestone";
        case SchedulerKind::arbiter: return "arbiter";
        case SchedulerKind::hybrid: return "hybrid";
        case SchedulerKind::arbiter_hd: return "arbiter+hd";
    }
    return "?";
}

inline SchedulerKind scheduler_from_string(const std::string& s) {
    if (s == "constant") return SchedulerKind::constant;
    if (s == "milestone") return SchedulerKind::milestone;
    if (s == "arbiter") return SchedulerKind::arbiter;
    if (s == "hybrid") return SchedulerKind::hybrid;
    if (s == "arbiter+hd") return SchedulerKind::arbiter_hd;
    throw validation_error("unknown scheduler '" + s + "'");
}

struct MetaConfig {
    std::size_t n_samples = 10;   // N
    std::size_t n_learn = 1;      // epochs between batch-size updates
    double zeta_phi = 1e-3;       // meta learning rate for phi and the gate
    double zeta_alpha = 1e-2;     // meta learning rate for alpha
    double eta = 0.1;             // inner learning rate
    std::size_t epochs = 30;
    SchedulerKind scheduler = SchedulerKind::constant;
    std::vector<std::pair<std::size_t, std::size_t>> milestones;  // (epoch, B), 1-based epochs
    std::size_t b0 = 128;
    std::size_t val_batch = 128;  // V
    std::size_t warmup_epochs = 0;
    OptKind optimizer = OptKind::sgd;
    double beta_hyper = 0.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (zeta_phi < 0 || zeta_alpha < 0) {
            throw validation_error("config: meta learning rates must be >= 0");
        }
        if (n_learn < 1) throw validation_error("config: n_learn must be >= 1");
        if (n_samples < 1) throw validation_error("config: n_samples must be >= 1");
        if (epochs < 1) throw validation_error("config: epochs must be >= 1");
        if (eta <= 0) throw validation_error("config: eta must be > 0");
        if (b0 < 1) throw validation_error("config: b0 must be >= 1");
        if (val_batch < 1) throw validation_error("config: val_batch must be >= 1");
        for (std::size_t i = 1; i < milestones.size(); ++i) {
            if (milestones[i].first <= milestones[i - 1].first) {
                throw validation_error("config: milestone epochs must be strictly increasing");
            }
        }
        if (scheduler == SchedulerKind::arbiter_hd && !is_hd(optimizer)) {
            throw validation_error("config: scheduler arbiter+hd needs optimizer sgdhd or adamhd");
        }
        if (is_hd(optimizer) && beta_hyper < 0) {
            throw validation_error("config: beta_hyper must be >= 0");
        }
    }
};

struct StepRecord {
    std::size_t epoch = 0;  // 1-based
    std::size_t t = 0;      // inner step within the epoch
    double train_loss = 0.0;
    double meta_f = std::numeric_limits<double>::quiet_NaN();
    std::size_t batch_b = 0;
    double mixed_s = std::numeric_limits<double>::quiet_NaN();
    double candidate_b = std::numeric_limits<double>::quiet_NaN();
    double eta = 0.0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    std::size_t next_b = 0;
};

struct RunLog {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
    std::size_t skipped_meta_updates = 0;
    std::vector<std::string> warnings;
};

struct MetaStepResult {
    double s = std::numeric_limits<double>::quiet_NaN();        // mixed sample (logit space)
    double f = std::numeric_limits<double>::quiet_NaN();        // meta loss
    std::vector<double> samples;                                // S at this step
    double candidate_b = std::numeric_limits<double>::quiet_NaN();
    bool updated = false;
};

namespace detail {

inline constexpr std::uint64_t kTagInit = 1;
inline constexpr std::uint64_t kTagAgent = 2;
inline constexpr std::uint64_t kTagTrainSampler = 3;
inline constexpr std::uint64_t kTagValSampler = 4;
inline constexpr std::uint64_t kTagAlphaReset = 5;

inline void axpy(std::vector<double>& x, double a, std::span<const double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * g[i];
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace detail

// One Arbiter update from the post-inner-step weights w_next. Builds the
// full differentiable path (agent MLP -> mixed sample -> gated features ->
// meta loss F), backpropagates, and applies plain gradient descent to phi,
// alpha, and the gate weights. The inner weights are read through
// stop-gradient and never modified.
inline MetaStepResult meta_step(AgentState& agent, const InnerParams& w_next,
                                std::span<const double> x_val, std::span<const int> y_val,
                                std::size_t v_rows, std::size_t b_cur,
                                const BatchSizeCodec& codec, double zeta_phi, double zeta_alpha,
                                RunLog* log = nullptr) {
    ad::Tape tape;
    AgentNodes an = agent_graph(tape, agent, x_val, v_rows, codec.encode_clamped(b_cur));
    ForwardNodes fn = gated_forward(tape, w_next, x_val, v_rows, an.mixed, an.a_phi);
    const ad::NodeId f_node = loss(tape, fn.logits, y_val);

    MetaStepResult out;
    out.f = tape.value(f_node);
    out.s = tape.value(an.mixed);
    auto s_vals = tape.values(an.samples);
    out.samples.assign(s_vals.begin(), s_vals.end());
    if (!std::isfinite(out.f)) {
        throw numeric_error("meta_step: non-finite meta loss F");
    }

    tape.backward(f_node);
    const auto dw1 = tape.adjoint(an.w1);
    const auto db1 = tape.adjoint(an.b1);
    const auto dw2 = tape.adjoint(an.w2);
    const auto db2 = tape.adjoint(an.b2);
    const auto dalpha = tape.adjoint(an.alpha);
    const auto da_phi = tape.adjoint(an.a_phi);
    const bool finite = detail::all_finite(dw1) && detail::all_finite(db1) &&
                        detail::all_finite(dw2) && detail::all_finite(db2) &&
                        detail::all_finite(dalpha) && detail::all_finite(da_phi);
    if (!finite) {
        if (log) {
            ++log->skipped_meta_updates;
            log->warnings.push_back("meta_step: non-finite meta-gradient, update skipped");
        }
    } else {
        detail::axpy(agent.w1, -zeta_phi, dw1);
        detail::axpy(agent.b1, -zeta_phi, db1);
        detail::axpy(agent.w2, -zeta_phi, dw2);
        detail::axpy(agent.b2, -zeta_phi, db2);
        detail::axpy(agent.a_phi, -zeta_phi, da_phi);
        detail::axpy(agent.alpha, -zeta_alpha, dalpha);
        out.updated = true;
    }
    out.candidate_b = static_cast<double>(codec.decode(select_best(out.samples, agent.alpha)));
    return out;
}

// Everything one run owns. Strictly sequential; distinct runs are independent.
struct ExperimentState {
    MetaConfig cfg;
    BatchSizeCodec codec;
    const Dataset* train = nullptr;
    const Dataset* val = nullptr;
    InnerParams w;
    AgentState agent;
    OptimizerState opt;
    BatchSampler train_sampler;
    CyclingSampler val_sampler;
    std::size_t current_b = 0;
    std::size_t epoch = 0;  // 1-based while running
    std::vector<double> last_samples;  // S_T of the final meta-step this epoch
    RunLog log;
};

namespace detail {

inline void gather_rows(const Dataset& ds, std::span<const std::size_t> idx,
                        std::vector<double>& x, std::vector<int>& y) {
    x.resize(idx.size() * ds.dim);
    y.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        auto r = ds.row(idx[i]);
        std::copy(r.begin(), r.end(), x.begin() + static_cast<std::ptrdiff_t>(i * ds.dim));
        y[i] = ds.labels[idx[i]];
    }
}

inline std::optional<std::size_t> milestone_for_epoch(const MetaConfig& cfg, std::size_t epoch) {
    for (const auto& [e, b] : cfg.milestones) {
        if (e == epoch) return b;
    }
    return std::nullopt;
}

}  // namespace detail

// One pass over the training set: per batch, an Eq.-1 gradient and inner
// descent step, then (for Arbiter schedulers past warmup) one meta-step on a
// fresh validation mini-batch.
inline void run_epoch(ExperimentState& st) {
    const MetaConfig& cfg = st.cfg;
    st.train_sampler.start_epoch(st.epoch);
    const bool meta_active = uses_arbiter(cfg.scheduler) && st.epoch > cfg.warmup_epochs;
    std::vector<double> x;
    std::vector<int> y;
    std::size_t t = 0;
    while (auto batch = st.train_sampler.next()) {
        detail::gather_rows(*st.train, *batch, x, y);
        ad::Tape tape;
        ForwardNodes fn = forward(tape, st.w, x, batch->size(), /*trainable=*/true);
        const ad::NodeId l_node = loss(tape, fn.logits, y);
        const double train_loss = tape.value(l_node);
        tape.backward(l_node);
        std::vector<double> grad = collect_grad(tape, fn, st.w);
        if (is_hd(st.opt.kind)) hd_update(st.opt, grad);
        inner_step(st.w, st.opt, grad);

        StepRecord rec;
        rec.epoch = st.epoch;
        rec.t = t;
        rec.train_loss = train_loss;
        rec.batch_b = st.current_b;
        rec.eta = st.opt.eta;
        if (meta_active) {
            std::vector<std::size_t> vidx = st.val_sampler.next();
            std::vector<double> xv;
            std::vector<int> yv;
            detail::gather_rows(*st.val, vidx, xv, yv);
            MetaStepResult ms = meta_step(st.agent, st.w, xv, yv, vidx.size(), st.current_b,
                                          st.codec, cfg.zeta_phi, cfg.zeta_alpha, &st.log);
            rec.meta_f = ms.f;
            rec.mixed_s = ms.s;
            rec.candidate_b = ms.candidate_b;
            st.last_samples = std::move(ms.samples);
        }
        st.log.steps.push_back(rec);
        ++t;
    }
}

// Epoch-boundary batch-size update (Alg. 1 outer step). Every n_learn epochs
// the best retained sample is decoded into B_{n+1} and alpha is redrawn;
// milestone tables override B at their epochs; hybrid does both.
inline void epoch_boundary_update(ExperimentState& st) {
    const MetaConfig& cfg = st.cfg;
    const std::size_t n = st.epoch;
    std::size_t next_b = st.current_b;
    const bool arbiter_due = uses_arbiter(cfg.scheduler) && n > cfg.warmup_epochs &&
                             n % cfg.n_learn == 0 && !st.last_samples.empty();
    if (arbiter_due) {
        const double b_t = select_best(st.last_samples, st.agent.alpha);
        next_b = st.codec.decode(b_t);
        reset_alpha(st.agent, rng::derive(cfg.seed, detail::kTagAlphaReset, n));
    }
    if (cfg.scheduler == SchedulerKind::milestone || cfg.scheduler == SchedulerKind::hybrid) {
        if (auto mb = detail::milestone_for_epoch(cfg, n + 1)) next_b = *mb;
    }
    if (next_b > st.train->size()) {
        st.log.warnings.push_back("epoch " + std::to_string(n) + ": decoded B=" +
                                  std::to_string(next_b) + " exceeds M=" +
                                  std::to_string(st.train->size()) + ", clamped");
        next_b = st.train->size();
    }
    if (next_b != st.current_b) st.train_sampler.set_batch_size(next_b);
    st.current_b = next_b;
}

struct RunSetup {
    MetaConfig meta;
    BatchSizeCodec codec;
    Dataset train, val, test;
    std::vector<std::size_t> hidden_widths = {64, 32};
    std::optional<InnerParams> initial_params;  // overrides seeded init
    std::optional<AgentState> initial_agent;
};

struct RunResult {
    RunLog log;
    InnerParams final_params;
    AgentState final_agent;
    OptimizerState final_opt;
    EvalMetrics test_metrics;
};

inline ExperimentState make_experiment(const RunSetup& setup) {
    setup.meta.validate();
    setup.codec.check();
    validate(setup.train);
    validate(setup.val);
    if (setup.train.regression() || setup.val.regression()) {
        throw validation_error("run: training requires a classification dataset");
    }
    if (setup.train.dim != setup.val.dim) {
        throw validation_error("run: train and val dimensions differ");
    }
    const MetaConfig& cfg = setup.meta;
    std::vector<std::size_t> widths;
    widths.push_back(setup.train.dim);
    widths.insert(widths.end(), setup.hidden_widths.begin(), setup.hidden_widths.end());
    widths.push_back(static_cast<std::size_t>(setup.train.num_classes));

    std::size_t b0 = cfg.b0;
    ExperimentState st{
        .cfg = cfg,
        .codec = setup.codec,
        .train = &setup.train,
        .val = &setup.val,
        .w = setup.initial_params ? *setup.initial_params
                                  : InnerParams::init(widths, rng::derive(cfg.seed, detail::kTagInit)),
        .agent = setup.initial_agent
                     ? *setup.initial_agent
                     : AgentState::init(setup.train.dim, cfg.n_samples,
                                        widths[widths.size() - 2],
                                        rng::derive(cfg.seed, detail::kTagAgent)),
        .opt = OptimizerState::make(cfg.optimizer, cfg.eta, cfg.beta_hyper),
        .train_sampler = BatchSampler(setup.train.size(), 1,
                                      rng::derive(cfg.seed, detail::kTagTrainSampler)),
        .val_sampler = CyclingSampler(setup.val.size(), cfg.val_batch,
                                      rng::derive(cfg.seed, detail::kTagValSampler)),
    };
    if (st.agent.feature_dim != st.w.feature_dim()) {
        throw validation_error("run: agent gate width does not match the model's feature width");
    }
    if (b0 > setup.train.size()) {
        st.log.warnings.push_back("b0=" + std::to_string(b0) + " exceeds M=" +
                                  std::to_string(setup.train.size()) + ", clamped");
        b0 = setup.train.size();
    }
    st.train_sampler.set_batch_size(b0);
    st.current_b = b0;
    return st;
}

// Full training per the configured protocol; returns the log and final state.
inline RunResult run_experiment(const RunSetup& setup) {
    ExperimentState st = make_experiment(setup);
    const std::size_t epochs = st.cfg.epochs;
    for (std::size_t n = 1; n <= epochs; ++n) {
        st.epoch = n;
        run_epoch(st);
        const EvalMetrics m = evaluate(st.w, st.val->inputs, st.val->labels);
        epoch_boundary_update(st);
        st.log.epochs.push_back({n, m.loss, m.accuracy, st.current_b});
    }
    RunResult out{std::move(st.log), std::move(st.w), std::move(st.agent), std::move(st.opt), {}};
    if (!setup.test.labels.empty()) {
        out.test_metrics = evaluate(out.final_params, setup.test.inputs, setup.test.labels);
    }
    return out;
}

}  // namespace hyperlearn
