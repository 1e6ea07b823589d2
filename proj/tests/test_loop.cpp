#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "hyperlearn/grad_check.hpp"
#include "hyperlearn/loop.hpp"
#include "hyperlearn/rng.hpp"
#include "test_util.hpp"

using namespace hyperlearn;

namespace {

RunSetup small_setup(std::size_t train_n, std::size_t val_n, std::uint64_t seed) {
    RunSetup s;
    s.train = make_synthetic("two_gaussians", train_n, seed);
    s.val = make_synthetic("two_gaussians", val_n, seed + 1);
    s.hidden_widths = {8, 4};
    s.meta.seed = seed;
    s.meta.val_batch = 16;
    return s;
}

AgentState randomized_agent(std::size_t d, std::size_t n, std::size_t f, std::uint64_t seed) {
    AgentState a = AgentState::init(d, n, f, seed);
    rng::Stream rs(seed + 100);
    for (double& v : a.w2) v = 0.3 * rs.normal();
    for (double& v : a.b2) v = 0.3 * rs.normal();
    for (double& v : a.a_phi) v = 0.3 * rs.normal();
    return a;
}

bool same_records(const RunLog& a, const RunLog& b) {
    if (a.steps.size() != b.steps.size() || a.epochs.size() != b.epochs.size()) return false;
    auto eq = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const auto& s = a.steps[i];
        const auto& t = b.steps[i];
        if (s.epoch != t.epoch || s.t != t.t || !eq(s.train_loss, t.train_loss) ||
            !eq(s.meta_f, t.meta_f) || s.batch_b != t.batch_b || !eq(s.mixed_s, t.mixed_s) ||
            !eq(s.candidate_b, t.candidate_b) || !eq(s.eta, t.eta)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        const auto& e = a.epochs[i];
        const auto& f = b.epochs[i];
        if (e.epoch != f.epoch || !eq(e.val_loss, f.val_loss) || !eq(e.val_acc, f.val_acc) ||
            e.next_b != f.next_b) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("meta_step with zero rates reports F but changes nothing") {
    const BatchSizeCodec codec;
    InnerParams w = InnerParams::init({2, 6, 4, 2}, 1);
    AgentState agent = randomized_agent(2, 3, 4, 2);
    const AgentState before = agent;
    rng::Stream rs(3);
    std::vector<double> x(8 * 2);
    for (double& v : x) v = rs.uniform(-1.0, 1.0);
    const std::vector<int> y = {0, 1, 0, 1, 1, 0, 1, 0};

    const MetaStepResult res = meta_step(agent, w, x, y, 8, 64, codec, 0.0, 0.0);
    CHECK(std::isfinite(res.f));
    CHECK(std::isfinite(res.s));
    CHECK(res.samples.size() == 3);
    CHECK(agent.w1 == before.w1);
    CHECK(agent.w2 == before.w2);
    CHECK(agent.alpha == before.alpha);
    CHECK(agent.a_phi == before.a_phi);
}

TEST_CASE("at zero gate weights only the gate receives gradient") {
    const BatchSizeCodec codec;
    InnerParams w = InnerParams::init({2, 6, 4, 2}, 4);
    AgentState agent = randomized_agent(2, 3, 4, 5);
    std::fill(agent.a_phi.begin(), agent.a_phi.end(), 0.0);
    const AgentState before = agent;
    rng::Stream rs(6);
    std::vector<double> x(8 * 2);
    for (double& v : x) v = rs.uniform(-1.0, 1.0);
    const std::vector<int> y = {0, 1, 0, 1, 1, 0, 1, 0};

    meta_step(agent, w, x, y, 8, 64, codec, 1.0, 1.0);
    CHECK(agent.w1 == before.w1);      // phi path closed: dF/ds = 0 at a_phi = 0
    CHECK(agent.w2 == before.w2);
    CHECK(agent.alpha == before.alpha);
    bool gate_moved = false;
    for (std::size_t i = 0; i < agent.a_phi.size(); ++i) {
        if (agent.a_phi[i] != before.a_phi[i]) gate_moved = true;
    }
    CHECK(gate_moved);
}

TEST_CASE("meta_step updates equal the finite-difference gradients of F") {
    const BatchSizeCodec codec;
    InnerParams w = InnerParams::init({5, 6, 4, 3}, 7);
    const AgentState agent0 = randomized_agent(5, 3, 4, 8);
    rng::Stream rs(9);
    std::vector<double> x(8 * 5);
    for (double& v : x) v = rs.uniform(0.0, 1.0);
    std::vector<int> y(8);
    for (int& v : y) v = static_cast<int>(rs.bounded(3));

    // unit meta rates: parameter delta == -gradient
    AgentState stepped = agent0;
    meta_step(stepped, w, x, y, 8, 100, codec, 1.0, 1.0);
    auto grad_of = [&](const std::vector<double>& before, const std::vector<double>& after) {
        std::vector<double> g(before.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = before[i] - after[i];
        return g;
    };

    AgentState probe = agent0;
    auto eval = [&]() {
        AgentState tmp = probe;
        return meta_step(tmp, w, x, y, 8, 100, codec, 0.0, 0.0).f;
    };
    gradcheck::Checker ck;
    ck.check(probe.w1, grad_of(agent0.w1, stepped.w1), eval);
    ck.check(probe.b1, grad_of(agent0.b1, stepped.b1), eval);
    ck.check(probe.w2, grad_of(agent0.w2, stepped.w2), eval);
    ck.check(probe.b2, grad_of(agent0.b2, stepped.b2), eval);
    ck.check(probe.alpha, grad_of(agent0.alpha, stepped.alpha), eval);
    ck.check(probe.a_phi, grad_of(agent0.a_phi, stepped.a_phi), eval);
    INFO("max rel err " << ck.max_rel());
    CHECK(ck.max_rel() < 1e-4);
}

TEST_CASE("meta_step never touches the inner weights") {
    const BatchSizeCodec codec;
    InnerParams w = InnerParams::init({2, 6, 4, 2}, 10);
    const std::vector<double> w_before = w.flat;
    AgentState agent = randomized_agent(2, 5, 4, 11);
    rng::Stream rs(12);
    std::vector<double> x(6 * 2);
    for (double& v : x) v = rs.uniform(-1.0, 1.0);
    const std::vector<int> y = {0, 1, 1, 0, 1, 0};
    meta_step(agent, w, x, y, 6, 64, codec, 0.5, 0.5);
    CHECK(w.flat == w_before);
}

TEST_CASE("run_epoch emits one inner and one meta step per batch") {
    RunSetup s = small_setup(100, 40, 20);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 32;
    s.meta.epochs = 1;
    const RunResult r = run_experiment(s);
    REQUIRE(r.log.steps.size() == 4);  // ceil(100/32)
    for (const auto& rec : r.log.steps) {
        CHECK(rec.batch_b == 32);
        CHECK(std::isfinite(rec.meta_f));
        CHECK(std::isfinite(rec.mixed_s));
        CHECK(std::isfinite(rec.train_loss));
    }
    CHECK(r.log.epochs.size() == 1);
}

TEST_CASE("constant scheduler runs no meta steps and keeps B fixed") {
    RunSetup s = small_setup(60, 20, 21);
    s.meta.scheduler = SchedulerKind::constant;
    s.meta.b0 = 16;
    s.meta.epochs = 3;
    const RunResult r = run_experiment(s);
    for (const auto& rec : r.log.steps) {
        CHECK(rec.batch_b == 16);
        CHECK(std::isnan(rec.meta_f));
        CHECK(std::isnan(rec.mixed_s));
        CHECK(std::isnan(rec.candidate_b));
    }
    for (const auto& e : r.log.epochs) CHECK(e.next_b == 16);
}

TEST_CASE("seeded replays produce identical logs") {
    RunSetup s = small_setup(80, 30, 22);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 20;
    s.meta.epochs = 3;
    const RunResult a = run_experiment(s);
    const RunResult b = run_experiment(s);
    CHECK(same_records(a.log, b.log));
    CHECK(a.final_params.flat == b.final_params.flat);

    RunSetup other = s;
    other.meta.seed = 99;
    const RunResult c = run_experiment(other);
    CHECK_FALSE(same_records(a.log, c.log));
}

TEST_CASE("n_learn gates the epochs where B may move") {
    RunSetup s = small_setup(90, 30, 23);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 24;
    s.meta.epochs = 9;
    s.meta.n_learn = 3;
    const RunResult r = run_experiment(s);
    std::size_t prev = 24;
    for (const auto& e : r.log.epochs) {
        if (e.epoch % 3 != 0) {
            CHECK(e.next_b == prev);  // off-cycle boundaries keep B
        }
        prev = e.next_b;
    }
}

TEST_CASE("alpha is redrawn at every n_learn boundary") {
    RunSetup s = small_setup(50, 20, 24);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 25;
    s.meta.epochs = 1;
    s.meta.zeta_alpha = 0.0;
    s.meta.zeta_phi = 0.0;
    const AgentState before = AgentState::init(
        s.train.dim, s.meta.n_samples, 4, rng::derive(s.meta.seed, 2));
    s.initial_agent = before;
    const RunResult r = run_experiment(s);
    // rates are zero, so any change to alpha came from the boundary redraw
    CHECK(r.final_agent.alpha != before.alpha);
    CHECK(r.final_agent.w1 == before.w1);
}

TEST_CASE("milestone schedule is an exact step function") {
    RunSetup s = small_setup(80, 30, 25);
    s.meta.scheduler = SchedulerKind::milestone;
    s.meta.b0 = 10;
    s.meta.epochs = 5;
    s.meta.milestones = {{2, 20}, {4, 40}};
    const RunResult r = run_experiment(s);
    const std::vector<std::size_t> want_b = {10, 20, 20, 40, 40};
    for (const auto& rec : r.log.steps) {
        CHECK(rec.batch_b == want_b[rec.epoch - 1]);
        CHECK(std::isnan(rec.meta_f));
    }
}

TEST_CASE("hybrid override pins B to the table at milestone epochs") {
    RunSetup s = small_setup(120, 40, 26);
    s.meta.scheduler = SchedulerKind::hybrid;
    s.meta.b0 = 24;
    s.meta.epochs = 6;
    s.meta.milestones = {{3, 64}, {5, 96}};
    const RunResult r = run_experiment(s);
    for (const auto& rec : r.log.steps) {
        if (rec.epoch == 3) CHECK(rec.batch_b == 64);
        if (rec.epoch == 5) CHECK(rec.batch_b == 96);
    }
}

TEST_CASE("decoded batch sizes exceeding M are clamped with a warning") {
    RunSetup s = small_setup(50, 20, 27);
    s.meta.scheduler = SchedulerKind::milestone;
    s.meta.b0 = 10;
    s.meta.epochs = 2;
    s.meta.milestones = {{2, 500}};
    const RunResult r = run_experiment(s);
    CHECK(r.log.epochs[0].next_b == 50);
    REQUIRE_FALSE(r.log.warnings.empty());
    CHECK(r.log.warnings[0].find("clamped") != std::string::npos);
}

TEST_CASE("a frozen zero agent never moves the batch size") {
    RunSetup s = small_setup(60, 20, 28);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 30;
    s.meta.epochs = 4;
    s.meta.zeta_phi = 0.0;  // phi stays frozen at zero
    AgentState zero = AgentState::init(s.train.dim, s.meta.n_samples, 4, 1);
    std::fill(zero.w1.begin(), zero.w1.end(), 0.0);
    std::fill(zero.b1.begin(), zero.b1.end(), 0.0);
    s.initial_agent = zero;
    const RunResult r = run_experiment(s);
    for (const auto& rec : r.log.steps) CHECK(rec.batch_b == 30);
    for (const auto& e : r.log.epochs) CHECK(e.next_b == 30);
}

TEST_CASE("arbiter batch sizes stay within the codec bounds") {
    RunSetup s = small_setup(700, 80, 29);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 64;
    s.meta.epochs = 5;
    s.meta.zeta_phi = 0.05;  // deliberately aggressive
    s.meta.zeta_alpha = 0.3;
    s.codec = {.b_min = 16, .b_max = 512};
    const RunResult r = run_experiment(s);
    for (const auto& e : r.log.epochs) {
        CHECK(e.next_b >= 16);
        CHECK(e.next_b <= 512);
    }
    for (const auto& rec : r.log.steps) CHECK(std::isfinite(rec.meta_f));
}

TEST_CASE("replaying a recorded B trace without the agent reproduces w") {
    RunSetup s = small_setup(90, 30, 30);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 16;
    s.meta.epochs = 4;
    s.meta.zeta_phi = 0.05;
    s.meta.zeta_alpha = 0.3;
    const RunResult live = run_experiment(s);

    RunSetup replay = s;
    replay.meta.scheduler = SchedulerKind::milestone;
    replay.meta.milestones.clear();
    for (const auto& e : live.log.epochs) {
        if (e.epoch + 1 <= s.meta.epochs) {
            replay.meta.milestones.push_back({e.epoch + 1, e.next_b});
        }
    }
    const RunResult replayed = run_experiment(replay);
    CHECK(replayed.final_params.flat == live.final_params.flat);
}

TEST_CASE("warmup delays meta activity") {
    RunSetup s = small_setup(60, 20, 31);
    s.meta.scheduler = SchedulerKind::arbiter;
    s.meta.b0 = 20;
    s.meta.epochs = 4;
    s.meta.warmup_epochs = 2;
    const RunResult r = run_experiment(s);
    for (const auto& rec : r.log.steps) {
        if (rec.epoch <= 2) {
            CHECK(std::isnan(rec.meta_f));
            CHECK(rec.batch_b == 20);
        } else {
            CHECK(std::isfinite(rec.meta_f));
        }
    }
    CHECK(r.log.steps.front().batch_b == 20);
}

TEST_CASE("meta-gradient fidelity on the small instance") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto res = gradcheck::check_meta_gradient(seed);
        INFO("seed " << seed << " max rel " << res.max_rel_err);
        CHECK(res.pass());
    }
}

TEST_CASE("config validation rejects bad settings") {
    MetaConfig c;
    c.n_learn = 0;
    CHECK_THROWS_AS(c.validate(), validation_error);
    c = MetaConfig{};
    c.milestones = {{5, 10}, {5, 20}};
    CHECK_THROWS_AS(c.validate(), validation_error);
    c = MetaConfig{};
    c.scheduler = SchedulerKind::arbiter_hd;
    c.optimizer = OptKind::sgd;
    CHECK_THROWS_AS(c.validate(), validation_error);
    c = MetaConfig{};
    c.eta = 0.0;
    CHECK_THROWS_AS(c.validate(), validation_error);
}
