#pragma once

// Central finite-difference verification of every analytic gradient path:
// the individual tape ops, the gated feature response, the agent's sample
// mixing, and the full meta-gradient. The numeric side only ever evaluates
// forward passes, so it stays independent of backward().

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hyperlearn/agent.hpp"
#include "hyperlearn/common.hpp"
#include "hyperlearn/model.hpp"
#include "hyperlearn/rng.hpp"
#include "hyperlearn/tape.hpp"

namespace hyperlearn::gradcheck {

inline constexpr double kStep = 1e-5;
inline constexpr double kRelTol = 1e-4;
// Relative error with an absolute floor: |a-n| <= 1e-7 counts as zero.
inline double rel_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    return std::abs(analytic - numeric) / denom;
}

struct SuiteResult {
    std::string suite;
    double max_rel_err = 0.0;
    std::size_t checks = 0;
    bool pass() const { return max_rel_err < kRelTol; }
};

// Central differences of eval() with respect to each coordinate of params,
// compared against the analytic gradient.
class Checker {
public:
    void check(std::vector<double>& params, std::span<const double> analytic,
               const std::function<double()>& eval) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double orig = params[i];
            params[i] = orig + kStep;
            const double fp = eval();
            params[i] = orig - kStep;
            const double fm = eval();
            params[i] = orig;
            const double numeric = (fp - fm) / (2.0 * kStep);
            const double r = rel_error(analytic[i], numeric);
            if (r > max_rel_) max_rel_ = r;
            ++count_;
        }
    }

    double max_rel() const { return max_rel_; }
    std::size_t count() const { return count_; }

private:
    double max_rel_ = 0.0;
    std::size_t count_ = 0;
};

namespace detail {

inline std::vector<double> random_vec(rng::Stream& rs, std::size_t n, double lo = -1.0,
                                      double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rs.uniform(lo, hi);
    return v;
}

// Random inputs for relu keep a margin around the kink so the central
// difference stays on one side.
inline std::vector<double> random_vec_no_kink(rng::Stream& rs, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) {
        const double mag = rs.uniform(0.05, 1.0);
        x = rs.uniform() < 0.5 ? -mag : mag;
    }
    return v;
}

}  // namespace detail

// A built check graph: the output node plus the grad-leaf handles in the
// same order as the parameter vectors they were created from.
struct BuiltGraph {
    ad::NodeId out{};
    std::vector<ad::NodeId> leaves;
};

// Finite differences for every differentiable tape op against a random
// linear functional of the output.
inline SuiteResult check_ops(std::uint64_t seed) {
    rng::Stream rs(rng::derive(seed, 0x09C5u));
    Checker ck;

    // builder(tape) rebuilds the graph from the current `inputs` values and
    // reports its grad leaves explicitly (argument evaluation order is
    // unspecified, so leaf creation order cannot be inferred from the tape).
    auto run = [&](std::vector<std::vector<double>*> inputs,
                   const std::function<BuiltGraph(ad::Tape&)>& builder) {
        ad::Tape probe;
        const BuiltGraph probe_graph = builder(probe);
        const std::vector<double> proj =
            detail::random_vec(rs, probe.values(probe_graph.out).size(), 0.2, 1.0);
        auto scalarize = [&proj](ad::Tape& t, ad::NodeId node) {
            if (ad::numel(t.node(node).shape) == 1) return node;
            const ad::NodeId p = t.leaf(t.node(node).shape, proj, false);
            return t.sum(t.mul(node, p));
        };
        ad::Tape tape;
        const BuiltGraph g = builder(tape);
        tape.backward(scalarize(tape, g.out));
        auto eval = [&]() {
            ad::Tape t;
            return t.value(scalarize(t, builder(t).out));
        };
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            ck.check(*inputs[i], tape.adjoint(g.leaves[i]), eval);
        }
    };

    {  // matmul
        auto a = detail::random_vec(rs, 2 * 3), b = detail::random_vec(rs, 3 * 4);
        run({&a, &b}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 3}, a, true);
            const auto nb = t.leaf({3, 4}, b, true);
            return {t.matmul(na, nb), {na, nb}};
        });
    }
    {  // add
        auto a = detail::random_vec(rs, 6), b = detail::random_vec(rs, 6);
        run({&a, &b}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 3}, a, true);
            const auto nb = t.leaf({2, 3}, b, true);
            return {t.add(na, nb), {na, nb}};
        });
    }
    {  // multiply, elementwise
        auto a = detail::random_vec(rs, 6), b = detail::random_vec(rs, 6);
        run({&a, &b}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 3}, a, true);
            const auto nb = t.leaf({2, 3}, b, true);
            return {t.mul(na, nb), {na, nb}};
        });
    }
    {  // multiply, scalar x matrix
        auto s = detail::random_vec(rs, 1), b = detail::random_vec(rs, 6);
        run({&s, &b}, [&](ad::Tape& t) -> BuiltGraph {
            const auto ns = t.leaf({1}, s, true);
            const auto nb = t.leaf({2, 3}, b, true);
            return {t.mul(ns, nb), {ns, nb}};
        });
    }
    {  // multiply, row vector x matrix
        auto v = detail::random_vec(rs, 3), m = detail::random_vec(rs, 12);
        run({&v, &m}, [&](ad::Tape& t) -> BuiltGraph {
            const auto nv = t.leaf({3}, v, true);
            const auto nm = t.leaf({4, 3}, m, true);
            return {t.mul(nv, nm), {nv, nm}};
        });
    }
    {  // broadcast-add
        auto m = detail::random_vec(rs, 12), v = detail::random_vec(rs, 3);
        run({&m, &v}, [&](ad::Tape& t) -> BuiltGraph {
            const auto nm = t.leaf({4, 3}, m, true);
            const auto nv = t.leaf({3}, v, true);
            return {t.broadcast_add(nm, nv), {nm, nv}};
        });
    }
    {  // relu
        auto a = detail::random_vec_no_kink(rs, 8);
        run({&a}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 4}, a, true);
            return {t.relu(na), {na}};
        });
    }
    {  // sigmoid
        auto a = detail::random_vec(rs, 8);
        run({&a}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 4}, a, true);
            return {t.sigmoid(na), {na}};
        });
    }
    {  // softmax
        auto a = detail::random_vec(rs, 8);
        run({&a}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 4}, a, true);
            return {t.softmax(na), {na}};
        });
    }
    {  // mean
        auto a = detail::random_vec(rs, 6);
        run({&a}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 3}, a, true);
            return {t.mean(na), {na}};
        });
    }
    {  // sum
        auto a = detail::random_vec(rs, 6);
        run({&a}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 3}, a, true);
            return {t.sum(na), {na}};
        });
    }
    {  // log (positive inputs)
        auto a = detail::random_vec(rs, 6, 0.5, 1.5);
        run({&a}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 3}, a, true);
            return {t.log(na), {na}};
        });
    }
    {  // cross-entropy-with-softmax
        auto z = detail::random_vec(rs, 4 * 3);
        const std::vector<int> labels = {0, 2, 1, 2};
        run({&z}, [&](ad::Tape& t) -> BuiltGraph {
            const auto nz = t.leaf({4, 3}, z, true);
            return {t.cross_entropy_with_softmax(nz, labels), {nz}};
        });
    }
    {  // scalar-scale
        auto a = detail::random_vec(rs, 6);
        run({&a}, [&](ad::Tape& t) -> BuiltGraph {
            const auto na = t.leaf({2, 3}, a, true);
            return {t.scale(na, -0.37), {na}};
        });
    }
    return {"autodiff-ops", ck.max_rel(), ck.count()};
}

// dF/ds and dF/dA_phi through the gated feature response, f=4.
inline SuiteResult check_gated_path(std::uint64_t seed) {
    rng::Stream rs(rng::derive(seed, 0x6A7Eu));
    const std::size_t batch = 6;
    InnerParams w = InnerParams::init({5, 6, 4, 3}, rs.next_u64());
    std::vector<double> x = detail::random_vec(rs, batch * 5);
    std::vector<int> y(batch);
    for (int& v : y) v = static_cast<int>(rs.bounded(3));
    std::vector<double> s_val = {rs.uniform(0.1, 0.9)};
    std::vector<double> a_phi = detail::random_vec(rs, 4, -0.5, 0.5);

    auto eval = [&]() {
        ad::Tape t;
        const ad::NodeId s = t.leaf({1}, s_val, true);
        const ad::NodeId a = t.leaf({4}, a_phi, true);
        ForwardNodes fn = gated_forward(t, w, x, batch, s, a);
        return t.value(loss(t, fn.logits, y));
    };
    ad::Tape tape;
    const ad::NodeId s = tape.leaf({1}, s_val, true);
    const ad::NodeId a = tape.leaf({4}, a_phi, true);
    ForwardNodes fn = gated_forward(tape, w, x, batch, s, a);
    tape.backward(loss(tape, fn.logits, y));

    Checker ck;
    ck.check(s_val, tape.adjoint(s), eval);
    ck.check(a_phi, tape.adjoint(a), eval);
    return {"gated-path", ck.max_rel(), ck.count()};
}

namespace detail {

inline AgentState random_agent(rng::Stream& rs, std::size_t input_dim, std::size_t n_samples,
                               std::size_t feature_dim) {
    AgentState a = AgentState::init(input_dim, n_samples, feature_dim, rs.next_u64());
    for (double& v : a.w2) v = 0.3 * rs.normal();
    for (double& v : a.b2) v = 0.3 * rs.normal();
    for (double& v : a.a_phi) v = 0.3 * rs.normal();
    return a;
}

}  // namespace detail

// d(mixed sample)/d(phi, alpha) through agent_sample + mix_samples.
inline SuiteResult check_agent_path(std::uint64_t seed) {
    rng::Stream rs(rng::derive(seed, 0xA3E2u));
    const std::size_t v_rows = 5, input_dim = 4, n = 3;
    AgentState agent = detail::random_agent(rs, input_dim, n, 4);
    std::vector<double> x = detail::random_vec(rs, v_rows * input_dim, 0.0, 1.0);
    const double center = 0.4;

    auto eval = [&]() {
        ad::Tape t;
        AgentNodes an = agent_graph(t, agent, x, v_rows, center);
        return t.value(an.mixed);
    };
    ad::Tape tape;
    AgentNodes an = agent_graph(tape, agent, x, v_rows, center);
    tape.backward(an.mixed);

    Checker ck;
    ck.check(agent.w1, tape.adjoint(an.w1), eval);
    ck.check(agent.b1, tape.adjoint(an.b1), eval);
    ck.check(agent.w2, tape.adjoint(an.w2), eval);
    ck.check(agent.b2, tape.adjoint(an.b2), eval);
    ck.check(agent.alpha, tape.adjoint(an.alpha), eval);
    return {"agent-path", ck.max_rel(), ck.count()};
}

// Full meta-gradient dF/d(phi, alpha, A_phi) on a small instance
// (f=4, N=3, V=8).
inline SuiteResult check_meta_gradient(std::uint64_t seed) {
    rng::Stream rs(rng::derive(seed, 0x3E7Au));
    const std::size_t v_rows = 8, input_dim = 5, n = 3, f = 4;
    InnerParams w = InnerParams::init({input_dim, 6, f, 3}, rs.next_u64());
    AgentState agent = detail::random_agent(rs, input_dim, n, f);
    std::vector<double> x = detail::random_vec(rs, v_rows * input_dim, 0.0, 1.0);
    std::vector<int> y(v_rows);
    for (int& v : y) v = static_cast<int>(rs.bounded(3));
    const double center = rs.uniform(-1.0, 1.0);

    auto build = [&](ad::Tape& t) {
        AgentNodes an = agent_graph(t, agent, x, v_rows, center);
        ForwardNodes fn = gated_forward(t, w, x, v_rows, an.mixed, an.a_phi);
        return std::pair{an, loss(t, fn.logits, y)};
    };
    auto eval = [&]() {
        ad::Tape t;
        return t.value(build(t).second);
    };
    ad::Tape tape;
    auto [an, f_node] = build(tape);
    tape.backward(f_node);

    Checker ck;
    ck.check(agent.w1, tape.adjoint(an.w1), eval);
    ck.check(agent.b1, tape.adjoint(an.b1), eval);
    ck.check(agent.w2, tape.adjoint(an.w2), eval);
    ck.check(agent.b2, tape.adjoint(an.b2), eval);
    ck.check(agent.alpha, tape.adjoint(an.alpha), eval);
    ck.check(agent.a_phi, tape.adjoint(an.a_phi), eval);
    return {"meta-gradient", ck.max_rel(), ck.count()};
}

inline std::vector<SuiteResult> run_all(std::uint64_t seed) {
    return {check_ops(seed), check_gated_path(seed), check_agent_path(seed),
            check_meta_gradient(seed)};
}

}  // namespace hyperlearn::gradcheck
