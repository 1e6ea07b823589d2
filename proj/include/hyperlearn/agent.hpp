#pragma once

// The hyper-learning agent: a pooling MLP that maps a validation mini-batch
// to N batch-size samples centered (in logit space) on the current batch
// size, softmax mixing weights alpha, and the linear gate weights a_phi used
// to modulate the inner network's high-level features.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/rng.hpp"
#include "hyperlearn/tape.hpp"

namespace hyperlearn {

// Bijection between natural batch sizes in [b_min, b_max] and unconstrained
// logits through the sigmoid: B = round(b_min + (b_max - b_min) * sigmoid(b)).
struct BatchSizeCodec {
    std::size_t b_min = 16;
    std::size_t b_max = 600;

    void check() const {
        if (b_min < 1 || b_min >= b_max) {
            throw validation_error("codec: need 1 <= b_min < b_max, got [" +
                                   std::to_string(b_min) + "," + std::to_string(b_max) + "]");
        }
    }

    std::size_t decode(double logit) const {
        const double span = static_cast<double>(b_max - b_min);
        const double raw = static_cast<double>(b_min) + span * ad::sigmoid_value(logit);
        const double rounded = std::round(raw);
        if (rounded <= static_cast<double>(b_min)) return b_min;
        if (rounded >= static_cast<double>(b_max)) return b_max;
        return static_cast<std::size_t>(rounded);
    }

    double encode(std::size_t b) const {
        if (b <= b_min || b >= b_max) {
            throw validation_error("codec: B=" + std::to_string(b) +
                                   " outside open interval (" + std::to_string(b_min) + "," +
                                   std::to_string(b_max) + "); clamp it inside first");
        }
        const double frac = static_cast<double>(b - b_min) / static_cast<double>(b_max - b_min);
        return std::log(frac / (1.0 - frac));
    }

    // Endpoints have infinite logits; the training loop centers its samples on
    // the nearest interior batch size instead.
    double encode_clamped(std::size_t b) const {
        return encode(std::clamp(b, b_min + 1, b_max - 1));
    }
};

struct SampleSet {
    std::vector<double> logits;  // S, length N
    std::size_t origin_b = 0;    // the batch size the samples are centered on
};

struct AgentState {
    std::size_t input_dim = 0;    // D
    std::size_t hidden = 32;
    std::size_t n_samples = 10;   // N
    std::size_t feature_dim = 0;  // f
    std::vector<double> w1, b1;   // phi: pooling MLP, D -> hidden
    std::vector<double> w2, b2;   // phi: hidden -> N head
    std::vector<double> alpha;    // mixing weights, length N
    std::vector<double> a_phi;    // gate weights, length f

    // Hidden layer He-initialized; the sample head starts at zero so the
    // untrained agent's action is "keep the current batch size". The gate
    // weights start at zero, making the gated pass an exact identity.
    static AgentState init(std::size_t input_dim, std::size_t n_samples, std::size_t feature_dim,
                           std::uint64_t seed) {
        if (input_dim == 0 || n_samples == 0 || feature_dim == 0) {
            throw validation_error("agent: dimensions must be positive");
        }
        AgentState a;
        a.input_dim = input_dim;
        a.n_samples = n_samples;
        a.feature_dim = feature_dim;
        a.w1.assign(input_dim * a.hidden, 0.0);
        a.b1.assign(a.hidden, 0.0);
        a.w2.assign(a.hidden * n_samples, 0.0);
        a.b2.assign(n_samples, 0.0);
        a.alpha.assign(n_samples, 0.0);
        a.a_phi.assign(feature_dim, 0.0);
        rng::Stream rs(rng::derive(seed, 0xA6E7u));
        const double scale = std::sqrt(2.0 / static_cast<double>(input_dim));
        for (double& w : a.w1) w = scale * rs.normal();
        for (double& v : a.alpha) v = rs.normal();
        return a;
    }
};

// Mean over the rows of a V x D mini-batch. The pooled vector feeds the agent
// MLP, so any batch of identical rows maps to the same samples.
inline std::vector<double> mean_pool(std::span<const double> x, std::size_t rows,
                                     std::size_t dim) {
    if (rows == 0 || x.size() != rows * dim) {
        throw shape_error("mean_pool: input of " + std::to_string(x.size()) +
                          " values does not factor as " + std::to_string(rows) + " x " +
                          std::to_string(dim));
    }
    std::vector<double> pooled(dim, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < dim; ++j) pooled[j] += x[i * dim + j];
    }
    for (double& v : pooled) v /= static_cast<double>(rows);
    return pooled;
}

// Tape handles for the agent's differentiable pipeline. The mixed sample is
// fed to the feature gate raw, matching the architecture diagram's routing of
// s into the linear map.
struct AgentNodes {
    ad::NodeId w1{}, b1{}, w2{}, b2{};  // phi leaves
    ad::NodeId alpha{};                 // mixing-weight leaf
    ad::NodeId a_phi{};                 // gate-weight leaf
    ad::NodeId samples{};               // S, shape (1, N)
    ad::NodeId mixed{};                 // s, scalar
};

// Builds samples S_i = encode(B_cur) + MLP_phi(mean_pool(X)) and the mixed
// representative sample s = softmax(alpha) . S on the given tape.
inline AgentNodes agent_graph(ad::Tape& tape, const AgentState& agent,
                              std::span<const double> x_val, std::size_t v_rows,
                              double center_logit) {
    for (double v : x_val) {
        if (!std::isfinite(v)) throw numeric_error("agent: non-finite validation input");
    }
    AgentNodes n;
    std::vector<double> pooled = mean_pool(x_val, v_rows, agent.input_dim);
    ad::NodeId pool = tape.leaf(ad::Shape{1, agent.input_dim}, std::move(pooled), false);
    n.w1 = tape.leaf(ad::Shape{agent.input_dim, agent.hidden}, agent.w1, true);
    n.b1 = tape.leaf(ad::Shape{agent.hidden}, agent.b1, true);
    n.w2 = tape.leaf(ad::Shape{agent.hidden, agent.n_samples}, agent.w2, true);
    n.b2 = tape.leaf(ad::Shape{agent.n_samples}, agent.b2, true);
    ad::NodeId h = tape.relu(tape.broadcast_add(tape.matmul(pool, n.w1), n.b1));
    ad::NodeId delta = tape.broadcast_add(tape.matmul(h, n.w2), n.b2);
    ad::NodeId center = tape.leaf(ad::Shape{1, agent.n_samples},
                                  std::vector<double>(agent.n_samples, center_logit), false);
    n.samples = tape.add(delta, center);
    n.alpha = tape.leaf(ad::Shape{1, agent.n_samples}, agent.alpha, true);
    n.mixed = tape.sum(tape.mul(tape.softmax(n.alpha), n.samples));
    n.a_phi = tape.leaf(ad::Shape{agent.feature_dim}, agent.a_phi, true);
    return n;
}

// Value-level sample generation (no gradients retained).
inline SampleSet agent_sample(const AgentState& agent, std::span<const double> x_val,
                              std::size_t v_rows, std::size_t b_cur,
                              const BatchSizeCodec& codec) {
    ad::Tape tape;
    AgentNodes n = agent_graph(tape, agent, x_val, v_rows, codec.encode_clamped(b_cur));
    auto s = tape.values(n.samples);
    return {std::vector<double>(s.begin(), s.end()), b_cur};
}

// s = sum_i softmax(alpha)_i * S_i; a convex combination of the samples.
inline double mix_samples(std::span<const double> samples, std::span<const double> alpha) {
    if (samples.size() != alpha.size() || samples.empty()) {
        throw validation_error("mix_samples: got " + std::to_string(samples.size()) +
                               " samples and " + std::to_string(alpha.size()) + " weights");
    }
    const double mx = *std::max_element(alpha.begin(), alpha.end());
    double total = 0.0;
    for (double a : alpha) total += std::exp(a - mx);
    double s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        s += std::exp(alpha[i] - mx) / total * samples[i];
    }
    return s;
}

// The sample with the highest mixing weight; ties break toward lower index.
inline double select_best(std::span<const double> samples, std::span<const double> alpha) {
    if (samples.empty() || samples.size() != alpha.size()) {
        throw validation_error("select_best: empty or mismatched inputs");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < alpha.size(); ++i) {
        if (alpha[i] > alpha[best]) best = i;
    }
    return samples[best];
}

// alpha ~ N(0,1) i.i.d.; phi and the gate weights are untouched.
inline void reset_alpha(AgentState& agent, std::uint64_t seed) {
    rng::Stream rs(rng::derive(seed, 0xA19Au));
    for (double& v : agent.alpha) v = rs.normal();
}

}  // namespace hyperlearn
