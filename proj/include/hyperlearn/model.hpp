#pragma once

// The inner system: an MLP whose penultimate activation is the high-level
// feature vector h. Two forward passes are provided: the plain pass used for
// inner training, and a gated pass where the features are modulated by the
// mixed batch-size sample through trainable gate weights,
//   h_hat = (a_phi * s) (.) h + h,
// with the inner weights gradient-blocked so adjoints reach only the gate
// inputs.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/rng.hpp"
#include "hyperlearn/tape.hpp"

namespace hyperlearn {

// Layered MLP weights stored in one flat buffer so optimizers can treat the
// parameter vector as a single array.
struct InnerParams {
    struct LayerSpec {
        std::size_t w_off = 0;
        std::size_t in = 0;
        std::size_t out = 0;
        std::size_t b_off = 0;
    };

    std::vector<std::size_t> widths;  // {D, hidden..., C}
    std::vector<LayerSpec> layers;
    std::vector<double> flat;
    std::size_t feature_layer = 0;  // penultimate layer; its activation is h

    std::size_t dim() const { return flat.size(); }
    std::size_t input_dim() const { return widths.front(); }
    std::size_t num_classes() const { return widths.back(); }
    std::size_t feature_dim() const { return widths[widths.size() - 2]; }

    std::span<const double> weight(std::size_t layer) const {
        const LayerSpec& l = layers[layer];
        return {flat.data() + l.w_off, l.in * l.out};
    }
    std::span<const double> bias(std::size_t layer) const {
        const LayerSpec& l = layers[layer];
        return {flat.data() + l.b_off, l.out};
    }

    // He-normal weights, zero biases.
    static InnerParams init(std::vector<std::size_t> widths, std::uint64_t seed) {
        if (widths.size() < 3) {
            throw validation_error("InnerParams: need at least input, one hidden, output; got " +
                                   std::to_string(widths.size()) + " widths");
        }
        InnerParams p;
        p.widths = std::move(widths);
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < p.widths.size(); ++l) {
            LayerSpec spec;
            spec.in = p.widths[l];
            spec.out = p.widths[l + 1];
            spec.w_off = off;
            off += spec.in * spec.out;
            spec.b_off = off;
            off += spec.out;
            p.layers.push_back(spec);
        }
        p.flat.assign(off, 0.0);
        p.feature_layer = p.layers.size() - 2;
        rng::Stream rs(rng::derive(seed, 0x57u));
        for (const LayerSpec& l : p.layers) {
            const double scale = std::sqrt(2.0 / static_cast<double>(l.in));
            for (std::size_t i = 0; i < l.in * l.out; ++i) {
                p.flat[l.w_off + i] = scale * rs.normal();
            }
        }
        return p;
    }
};

// Node handles produced by a forward pass; weight_leaves alternates W,b per
// layer in flat-buffer order so adjoints can be gathered back.
struct ForwardNodes {
    ad::NodeId logits{};
    ad::NodeId features{};
    std::vector<ad::NodeId> weight_leaves;
};

namespace detail {

inline void check_input(const InnerParams& p, std::span<const double> x, std::size_t batch) {
    if (batch == 0 || x.size() != batch * p.input_dim()) {
        throw shape_error("forward: input of " + std::to_string(x.size()) +
                          " values does not factor as batch " + std::to_string(batch) + " x D " +
                          std::to_string(p.input_dim()));
    }
}

inline std::pair<ad::NodeId, ad::NodeId> layer_leaves(ad::Tape& tape, const InnerParams& p,
                                                      std::size_t l, bool trainable,
                                                      ForwardNodes& out) {
    const auto& spec = p.layers[l];
    ad::NodeId w = tape.leaf(ad::Shape{spec.in, spec.out}, p.weight(l), trainable);
    ad::NodeId b = tape.leaf(ad::Shape{spec.out}, p.bias(l), trainable);
    out.weight_leaves.push_back(w);
    out.weight_leaves.push_back(b);
    return {w, b};
}

}  // namespace detail

// Plain pass: relu hidden layers, affine head. `trainable` marks the weight
// leaves as gradient targets (inner training); off for pure evaluation.
inline ForwardNodes forward(ad::Tape& tape, const InnerParams& p, std::span<const double> x,
                            std::size_t batch, bool trainable = true) {
    detail::check_input(p, x, batch);
    ForwardNodes out;
    ad::NodeId cur = tape.leaf(ad::Shape{batch, p.input_dim()}, x, false);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto [w, b] = detail::layer_leaves(tape, p, l, trainable, out);
        cur = tape.broadcast_add(tape.matmul(cur, w), b);
        if (l + 1 < p.layers.size()) {
            cur = tape.relu(cur);
            if (l == p.feature_layer) out.features = cur;
        }
    }
    out.logits = cur;
    return out;
}

// Gated pass: the inner weights enter through stop-gradient, so backward
// reaches only `s_gate` (a scalar node) and `a_phi` (a length-f node).
inline ForwardNodes gated_forward(ad::Tape& tape, const InnerParams& p, std::span<const double> x,
                                  std::size_t batch, ad::NodeId s_gate, ad::NodeId a_phi) {
    detail::check_input(p, x, batch);
    if (ad::numel(tape.node(s_gate).shape) != 1) {
        throw shape_error("gated_forward: s must be scalar, got shape " +
                          ad::shape_str(tape.node(s_gate).shape));
    }
    if (tape.node(a_phi).shape != ad::Shape{p.feature_dim()}) {
        throw shape_error("gated_forward: gate weights of shape " +
                          ad::shape_str(tape.node(a_phi).shape) + " for feature width " +
                          std::to_string(p.feature_dim()));
    }
    ForwardNodes out;
    ad::NodeId cur = tape.leaf(ad::Shape{batch, p.input_dim()}, x, false);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto [w, b] = detail::layer_leaves(tape, p, l, /*trainable=*/true, out);
        cur = tape.broadcast_add(tape.matmul(cur, tape.stop_gradient(w)),
                                 tape.stop_gradient(b));
        if (l + 1 < p.layers.size()) {
            cur = tape.relu(cur);
            if (l == p.feature_layer) {
                // h_hat = (a_phi * s) (.) h + h, broadcast over the batch
                ad::NodeId gate_vec = tape.mul(a_phi, s_gate);
                cur = tape.add(tape.mul(gate_vec, cur), cur);
                out.features = cur;
            }
        }
    }
    out.logits = cur;
    return out;
}

inline ad::NodeId loss(ad::Tape& tape, ad::NodeId logits, std::span<const int> labels) {
    return tape.cross_entropy_with_softmax(logits, labels);
}

// Gathers leaf adjoints back into flat-buffer layout after backward().
inline std::vector<double> collect_grad(const ad::Tape& tape, const ForwardNodes& nodes,
                                        const InnerParams& p) {
    std::vector<double> grad(p.dim(), 0.0);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& spec = p.layers[l];
        auto dw = tape.adjoint(nodes.weight_leaves[2 * l]);
        auto db = tape.adjoint(nodes.weight_leaves[2 * l + 1]);
        std::copy(dw.begin(), dw.end(), grad.begin() + static_cast<std::ptrdiff_t>(spec.w_off));
        std::copy(db.begin(), db.end(), grad.begin() + static_cast<std::ptrdiff_t>(spec.b_off));
    }
    return grad;
}

struct EvalMetrics {
    double loss = 0.0;
    double accuracy = 0.0;
};

// Value-only evaluation over a full input set, chunked to bound tape size.
inline EvalMetrics evaluate(const InnerParams& p, std::span<const double> x,
                            std::span<const int> labels, std::size_t chunk = 1024) {
    const std::size_t m = labels.size();
    if (m == 0) throw validation_error("evaluate: empty input");
    const std::size_t d = p.input_dim();
    double total_loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < m; start += chunk) {
        const std::size_t b = std::min(chunk, m - start);
        ad::Tape tape;
        ForwardNodes f = forward(tape, p, x.subspan(start * d, b * d), b, /*trainable=*/false);
        auto batch_labels = labels.subspan(start, b);
        total_loss += tape.value(loss(tape, f.logits, batch_labels)) * static_cast<double>(b);
        auto logits = tape.values(f.logits);
        const std::size_t c = p.num_classes();
        for (std::size_t i = 0; i < b; ++i) {
            const double* row = logits.data() + i * c;
            std::size_t best = 0;
            for (std::size_t j = 1; j < c; ++j) {
                if (row[j] > row[best]) best = j;
            }
            if (static_cast<int>(best) == batch_labels[i]) ++correct;
        }
    }
    return {total_loss / static_cast<double>(m),
            static_cast<double>(correct) / static_cast<double>(m)};
}

}  // namespace hyperlearn
