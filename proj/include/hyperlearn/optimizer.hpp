#pragma once

// Inner-loop optimizers: sgd, momentum, adam, plus hypergradient-descent
// variants (sgdhd, adamhd) that adapt the learning rate online from the inner
// product of consecutive gradients.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/model.hpp"

namespace hyperlearn {

enum class OptKind { sgd, momentum, adam, sgdhd, adamhd };

inline bool is_hd(OptKind k) { return k == OptKind::sgdhd || k == OptKind::adamhd; }

inline std::string to_string(OptKind k) {
    switch (k) {
        case OptKind::sgd: return "sgd";
        case OptKind::momentum: return "momentum";
        case OptKind::adam: return "adam";
        case OptKind::sgdhd: return "sgdhd";
        case OptKind::adamhd: return "adamhd";
    }
    return "?";
}

inline OptKind opt_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptKind::sgd;
    if (s == "momentum") return OptKind::momentum;
    if (s == "adam") return OptKind::adam;
    if (s == "sgdhd") return OptKind::sgdhd;
    if (s == "adamhd") return OptKind::adamhd;
    throw validation_error("unknown optimizer '" + s + "'");
}

struct OptimizerState {
    OptKind kind = OptKind::sgd;
    double eta = 0.1;
    double beta_hyper = 0.0;   // hypergradient step size (HD kinds)
    double eta_min = 1e-6;     // lower clamp keeps eta positive under HD
    double mu = 0.9;           // momentum coefficient
    double beta1 = 0.9;        // adam first moment
    double beta2 = 0.999;      // adam second moment
    double eps = 1e-8;
    std::uint64_t step_count = 0;
    std::vector<double> velocity;   // momentum / sgdhd
    std::vector<double> m1, m2;     // adam / adamhd
    std::vector<double> prev_grad;  // HD kinds only

    static OptimizerState make(OptKind kind, double eta, double beta_hyper = 0.0) {
        OptimizerState s;
        s.kind = kind;
        s.eta = eta;
        s.beta_hyper = beta_hyper;
        return s;
    }
};

// Hypergradient update: eta += beta * <grad_t, prev_grad>, clamped below at
// eta_min. The first call only primes prev_grad.
inline void hd_update(OptimizerState& opt, std::span<const double> grad) {
    if (!is_hd(opt.kind)) return;
    if (opt.prev_grad.empty()) {
        opt.prev_grad.assign(grad.begin(), grad.end());
        return;
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) dot += grad[i] * opt.prev_grad[i];
    opt.eta += opt.beta_hyper * dot;
    if (opt.eta < opt.eta_min) opt.eta = opt.eta_min;
    opt.prev_grad.assign(grad.begin(), grad.end());
}

// One descent step on the flat parameter buffer.
inline void inner_step(InnerParams& params, OptimizerState& opt, std::span<const double> grad) {
    if (grad.size() != params.dim()) {
        throw shape_error("inner_step: gradient of " + std::to_string(grad.size()) +
                          " elements for " + std::to_string(params.dim()) + " parameters");
    }
    for (double g : grad) {
        if (!std::isfinite(g)) {
            throw numeric_error("inner_step: non-finite gradient element at step " +
                                std::to_string(opt.step_count));
        }
    }
    const std::size_t d = params.dim();
    double* w = params.flat.data();
    switch (opt.kind) {
        case OptKind::sgd:
        case OptKind::sgdhd:  // SGD-HD: plain descent step, eta driven by hd_update
            for (std::size_t i = 0; i < d; ++i) w[i] -= opt.eta * grad[i];
            break;
        case OptKind::momentum: {
            if (opt.velocity.empty()) opt.velocity.assign(d, 0.0);
            for (std::size_t i = 0; i < d; ++i) {
                opt.velocity[i] = opt.mu * opt.velocity[i] + grad[i];
                w[i] -= opt.eta * opt.velocity[i];
            }
            break;
        }
        case OptKind::adam:
        case OptKind::adamhd: {
            if (opt.m1.empty()) {
                opt.m1.assign(d, 0.0);
                opt.m2.assign(d, 0.0);
            }
            const double t = static_cast<double>(opt.step_count + 1);
            const double c1 = 1.0 - std::pow(opt.beta1, t);
            const double c2 = 1.0 - std::pow(opt.beta2, t);
            for (std::size_t i = 0; i < d; ++i) {
                opt.m1[i] = opt.beta1 * opt.m1[i] + (1.0 - opt.beta1) * grad[i];
                opt.m2[i] = opt.beta2 * opt.m2[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
                const double mhat = opt.m1[i] / c1;
                const double vhat = opt.m2[i] / c2;
                w[i] -= opt.eta * mhat / (std::sqrt(vhat) + opt.eps);
            }
            break;
        }
    }
    ++opt.step_count;
}

}  // namespace hyperlearn
