#pragma once

// Reverse-mode automatic differentiation over dense row-major double arrays.
// Values are computed eagerly onto an append-only tape; backward() walks the
// tape in exact reverse creation order and accumulates adjoints by summation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyperlearn/common.hpp"

namespace hyperlearn {

namespace testing {
// Fault-injection hook for the gradient-check harness: scales the sigmoid
// VJP so a deliberately wrong derivative is observable end to end. Unity in
// normal operation; only tests and `grad-check --inject-sigmoid-fault` touch it.
inline double sigmoid_vjp_fault = 1.0;
}  // namespace testing

namespace ad {

using Shape = std::vector<std::size_t>;
using NodeId = std::uint32_t;

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    out += ")";
    return out;
}

enum class Op : std::uint8_t {
    leaf,
    matmul,
    add,
    mul,
    broadcast_add,
    relu,
    sigmoid,
    softmax,
    mean,
    sum,
    log,
    cross_entropy,
    scale,
    stop_grad,
};

struct TapeNode {
    NodeId id{};
    Shape shape;
    std::vector<double> values;
    std::vector<double> adjoint;  // sized and filled by backward()
    Op op = Op::leaf;
    std::vector<NodeId> parents;
    bool requires_grad = false;
    bool grad_blocked = false;  // stop-gradient marker
    std::vector<int> labels;    // cross_entropy payload
    double factor = 1.0;        // scale payload
};

// Stable logistic function.
inline double sigmoid_value(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// out(m,n) = a(m,k) * b(k,n), accumulating into out.
inline void matmul_accumulate(const double* a, const double* b, double* out,
                              std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* orow = out + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = default;
    Tape& operator=(Tape&&) = default;

    std::size_t size() const { return nodes_.size(); }

    const TapeNode& node(NodeId id) const { return nodes_.at(id); }

    std::span<const double> values(NodeId id) const { return nodes_.at(id).values; }

    double value(NodeId id) const {
        const TapeNode& n = nodes_.at(id);
        if (n.values.size() != 1) {
            throw shape_error("value(): node is not scalar, shape " + shape_str(n.shape));
        }
        return n.values[0];
    }

    std::span<const double> adjoint(NodeId id) const { return nodes_.at(id).adjoint; }

    NodeId leaf(Shape shape, std::vector<double> values, bool requires_grad = false) {
        if (values.size() != numel(shape)) {
            throw shape_error("leaf: " + std::to_string(values.size()) + " values for shape " +
                              shape_str(shape));
        }
        return push(Op::leaf, std::move(shape), std::move(values), {}, requires_grad, false);
    }

    NodeId leaf(Shape shape, std::span<const double> values, bool requires_grad = false) {
        return leaf(std::move(shape), std::vector<double>(values.begin(), values.end()),
                    requires_grad);
    }

    NodeId scalar_leaf(double v, bool requires_grad = false) {
        return leaf(Shape{1}, std::vector<double>{v}, requires_grad);
    }

    // Dynamic-dispatch surface for payload-free ops.
    NodeId record(std::string_view op_kind, std::span<const NodeId> parents) {
        for (NodeId p : parents) {
            if (p >= nodes_.size()) {
                throw validation_error("record: parent handle " + std::to_string(p) +
                                       " not on this tape");
            }
        }
        auto unary = [&](NodeId (Tape::*fn)(NodeId)) {
            require_arity(op_kind, parents, 1);
            return (this->*fn)(parents[0]);
        };
        auto binary = [&](NodeId (Tape::*fn)(NodeId, NodeId)) {
            require_arity(op_kind, parents, 2);
            return (this->*fn)(parents[0], parents[1]);
        };
        if (op_kind == "matmul") return binary(&Tape::matmul);
        if (op_kind == "add") return binary(&Tape::add);
        if (op_kind == "multiply") return binary(&Tape::mul);
        if (op_kind == "broadcast-add") return binary(&Tape::broadcast_add);
        if (op_kind == "relu") return unary(&Tape::relu);
        if (op_kind == "sigmoid") return unary(&Tape::sigmoid);
        if (op_kind == "softmax") return unary(&Tape::softmax);
        if (op_kind == "mean") return unary(&Tape::mean);
        if (op_kind == "sum") return unary(&Tape::sum);
        if (op_kind == "log") return unary(&Tape::log);
        if (op_kind == "stop-gradient") return unary(&Tape::stop_gradient);
        throw validation_error("record: unknown op_kind '" + std::string(op_kind) + "'");
    }

    NodeId matmul(NodeId a, NodeId b) {
        const TapeNode& na = nodes_.at(a);
        const TapeNode& nb = nodes_.at(b);
        if (na.shape.size() != 2 || nb.shape.size() != 2 || na.shape[1] != nb.shape[0]) {
            throw shape_error("matmul: incompatible shapes " + shape_str(na.shape) + " x " +
                              shape_str(nb.shape));
        }
        const std::size_t m = na.shape[0], k = na.shape[1], n = nb.shape[1];
        std::vector<double> out(m * n, 0.0);
        matmul_accumulate(na.values.data(), nb.values.data(), out.data(), m, k, n);
        return push(Op::matmul, Shape{m, n}, std::move(out), {a, b});
    }

    NodeId add(NodeId a, NodeId b) {
        const TapeNode& na = nodes_.at(a);
        const TapeNode& nb = nodes_.at(b);
        if (na.shape != nb.shape) {
            throw shape_error("add: shapes differ " + shape_str(na.shape) + " vs " +
                              shape_str(nb.shape));
        }
        std::vector<double> out(na.values);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += nb.values[i];
        return push(Op::add, na.shape, std::move(out), {a, b});
    }

    // Elementwise product. Supports equal shapes, scalar x tensor, and row
    // vector (f) x matrix (B,f) broadcast over the batch dimension.
    NodeId mul(NodeId a, NodeId b) {
        const TapeNode& na = nodes_.at(a);
        const TapeNode& nb = nodes_.at(b);
        const MulKind kind = classify_mul(na, nb);
        const TapeNode& big = (kind == MulKind::scalar_left || kind == MulKind::vec_mat) ? nb : na;
        std::vector<double> out(numel(big.shape));
        apply_mul(kind, na.values, nb.values, out, big.shape);
        return push(Op::mul, big.shape, std::move(out), {a, b});
    }

    // matrix (B,f) + row vector (f), added to every row.
    NodeId broadcast_add(NodeId mat, NodeId vec) {
        const TapeNode& nm = nodes_.at(mat);
        const TapeNode& nv = nodes_.at(vec);
        if (nm.shape.size() != 2 || nv.shape.size() != 1 || nm.shape[1] != nv.shape[0]) {
            throw shape_error("broadcast-add: incompatible shapes " + shape_str(nm.shape) +
                              " + " + shape_str(nv.shape));
        }
        const std::size_t rows = nm.shape[0], cols = nm.shape[1];
        std::vector<double> out(nm.values);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] += nv.values[j];
        }
        return push(Op::broadcast_add, nm.shape, std::move(out), {mat, vec});
    }

    NodeId relu(NodeId a) {
        const TapeNode& na = nodes_.at(a);
        std::vector<double> out(na.values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] > 0.0 ? na.values[i] : 0.0;
        return push(Op::relu, na.shape, std::move(out), {a});
    }

    NodeId sigmoid(NodeId a) {
        const TapeNode& na = nodes_.at(a);
        std::vector<double> out(na.values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_value(na.values[i]);
        return push(Op::sigmoid, na.shape, std::move(out), {a});
    }

    // Softmax along the last axis.
    NodeId softmax(NodeId a) {
        const TapeNode& na = nodes_.at(a);
        if (na.shape.empty()) throw shape_error("softmax: scalar input");
        const std::size_t cols = na.shape.back();
        const std::size_t rows = na.values.size() / cols;
        std::vector<double> out(na.values.size());
        for (std::size_t r = 0; r < rows; ++r) {
            const double* x = na.values.data() + r * cols;
            double* y = out.data() + r * cols;
            const double mx = *std::max_element(x, x + cols);
            double total = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                y[j] = std::exp(x[j] - mx);
                total += y[j];
            }
            for (std::size_t j = 0; j < cols; ++j) y[j] /= total;
        }
        return push(Op::softmax, na.shape, std::move(out), {a});
    }

    NodeId mean(NodeId a) {
        const TapeNode& na = nodes_.at(a);
        double total = 0.0;
        for (double v : na.values) total += v;
        return push(Op::mean, Shape{1}, {total / static_cast<double>(na.values.size())}, {a});
    }

    NodeId sum(NodeId a) {
        const TapeNode& na = nodes_.at(a);
        double total = 0.0;
        for (double v : na.values) total += v;
        return push(Op::sum, Shape{1}, {total}, {a});
    }

    NodeId log(NodeId a) {
        const TapeNode& na = nodes_.at(a);
        std::vector<double> out(na.values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(na.values[i]);
        return push(Op::log, na.shape, std::move(out), {a});
    }

    // Mean cross-entropy over the batch, fused with softmax via log-sum-exp.
    NodeId cross_entropy_with_softmax(NodeId logits, std::span<const int> labels) {
        const TapeNode& nl = nodes_.at(logits);
        if (nl.shape.size() != 2) {
            throw shape_error("cross-entropy: logits must be rank 2, got " + shape_str(nl.shape));
        }
        const std::size_t batch = nl.shape[0], classes = nl.shape[1];
        if (labels.size() != batch) {
            throw shape_error("cross-entropy: " + std::to_string(labels.size()) +
                              " labels for batch " + std::to_string(batch));
        }
        double total = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const int y = labels[b];
            if (y < 0 || static_cast<std::size_t>(y) >= classes) {
                throw validation_error("cross-entropy: label " + std::to_string(y) +
                                       " out of range [0," + std::to_string(classes) + ")");
            }
            const double* z = nl.values.data() + b * classes;
            const double mx = *std::max_element(z, z + classes);
            double lse = 0.0;
            for (std::size_t c = 0; c < classes; ++c) lse += std::exp(z[c] - mx);
            total += mx + std::log(lse) - z[static_cast<std::size_t>(y)];
        }
        NodeId id = push(Op::cross_entropy, Shape{1}, {total / static_cast<double>(batch)},
                         {logits});
        nodes_[id].labels.assign(labels.begin(), labels.end());
        return id;
    }

    NodeId scale(NodeId a, double factor) {
        const TapeNode& na = nodes_.at(a);
        std::vector<double> out(na.values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * na.values[i];
        NodeId id = push(Op::scale, na.shape, std::move(out), {a});
        nodes_[id].factor = factor;
        return id;
    }

    // Identity forward; adjoint flow to the parent is cut.
    NodeId stop_gradient(NodeId a) {
        const TapeNode& na = nodes_.at(a);
        NodeId id = push(Op::stop_grad, na.shape, std::vector<double>(na.values), {a},
                         /*requires_grad=*/false, /*blocked=*/true);
        return id;
    }

    // Propagates adjoints from a scalar root to every requires_grad leaf.
    // Resets all adjoints first, so repeated calls are bitwise reproducible.
    void backward(NodeId root) {
        TapeNode& r = nodes_.at(root);
        if (numel(r.shape) != 1) {
            throw shape_error("backward: root must be scalar, got shape " + shape_str(r.shape));
        }
        for (TapeNode& n : nodes_) n.adjoint.assign(n.values.size(), 0.0);
        r.adjoint[0] = 1.0;
        for (std::uint32_t i = root + 1; i-- > 0;) {
            TapeNode& n = nodes_[i];
            if (n.op == Op::leaf || n.grad_blocked) continue;
            if (!n.requires_grad) continue;
            propagate(n);
        }
    }

private:
    enum class MulKind { elementwise, scalar_left, scalar_right, vec_mat, mat_vec };

    std::vector<TapeNode> nodes_;

    void require_arity(std::string_view op_kind, std::span<const NodeId> parents,
                       std::size_t want) const {
        if (parents.size() != want) {
            throw validation_error("record: op '" + std::string(op_kind) + "' takes " +
                                   std::to_string(want) + " parents, got " +
                                   std::to_string(parents.size()));
        }
    }

    NodeId push(Op op, Shape shape, std::vector<double> values, std::vector<NodeId> parents,
                bool requires_grad = false, bool blocked = false) {
        bool grad = requires_grad;
        for (NodeId p : parents) {
            if (p >= nodes_.size()) {
                throw validation_error("record: parent handle " + std::to_string(p) +
                                       " not on this tape");
            }
            grad = grad || nodes_[p].requires_grad;
        }
        if (blocked) grad = false;
        TapeNode n;
        n.id = static_cast<NodeId>(nodes_.size());
        n.shape = std::move(shape);
        n.values = std::move(values);
        n.op = op;
        n.parents = std::move(parents);
        n.requires_grad = grad;
        n.grad_blocked = blocked;
        nodes_.push_back(std::move(n));
        return nodes_.back().id;
    }

    static MulKind classify_mul(const TapeNode& a, const TapeNode& b) {
        if (a.shape == b.shape) return MulKind::elementwise;
        if (numel(a.shape) == 1) return MulKind::scalar_left;
        if (numel(b.shape) == 1) return MulKind::scalar_right;
        if (a.shape.size() == 1 && b.shape.size() == 2 && b.shape[1] == a.shape[0]) {
            return MulKind::vec_mat;
        }
        if (b.shape.size() == 1 && a.shape.size() == 2 && a.shape[1] == b.shape[0]) {
            return MulKind::mat_vec;
        }
        throw shape_error("multiply: incompatible shapes " + shape_str(a.shape) + " * " +
                          shape_str(b.shape));
    }

    static void apply_mul(MulKind kind, const std::vector<double>& a,
                          const std::vector<double>& b, std::vector<double>& out,
                          const Shape& out_shape) {
        switch (kind) {
            case MulKind::elementwise:
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
                break;
            case MulKind::scalar_left:
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[0] * b[i];
                break;
            case MulKind::scalar_right:
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[0];
                break;
            case MulKind::vec_mat: {
                const std::size_t cols = out_shape[1];
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i % cols] * b[i];
                break;
            }
            case MulKind::mat_vec: {
                const std::size_t cols = out_shape[1];
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i % cols];
                break;
            }
        }
    }

    void propagate(TapeNode& n) {
        switch (n.op) {
            case Op::matmul: {
                TapeNode& pa = nodes_[n.parents[0]];
                TapeNode& pb = nodes_[n.parents[1]];
                const std::size_t m = pa.shape[0], k = pa.shape[1], nn = pb.shape[1];
                if (pa.requires_grad) {
                    // dA = dC * B^T, dot rows of dC with rows of B
                    for (std::size_t i = 0; i < m; ++i) {
                        const double* drow = n.adjoint.data() + i * nn;
                        double* arow = pa.adjoint.data() + i * k;
                        for (std::size_t p = 0; p < k; ++p) {
                            const double* brow = pb.values.data() + p * nn;
                            double s = 0.0;
                            for (std::size_t j = 0; j < nn; ++j) s += drow[j] * brow[j];
                            arow[p] += s;
                        }
                    }
                }
                if (pb.requires_grad) {
                    // dB = A^T * dC
                    for (std::size_t i = 0; i < m; ++i) {
                        const double* arow = pa.values.data() + i * k;
                        const double* drow = n.adjoint.data() + i * nn;
                        for (std::size_t p = 0; p < k; ++p) {
                            const double av = arow[p];
                            if (av == 0.0) continue;
                            double* brow = pb.adjoint.data() + p * nn;
                            for (std::size_t j = 0; j < nn; ++j) brow[j] += av * drow[j];
                        }
                    }
                }
                break;
            }
            case Op::add: {
                for (int side = 0; side < 2; ++side) {
                    TapeNode& p = nodes_[n.parents[static_cast<std::size_t>(side)]];
                    if (!p.requires_grad) continue;
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) p.adjoint[i] += n.adjoint[i];
                }
                break;
            }
            case Op::mul: {
                TapeNode& pa = nodes_[n.parents[0]];
                TapeNode& pb = nodes_[n.parents[1]];
                const MulKind kind = classify_mul(pa, pb);
                mul_backward(kind, pa, pb, n);
                break;
            }
            case Op::broadcast_add: {
                TapeNode& pm = nodes_[n.parents[0]];
                TapeNode& pv = nodes_[n.parents[1]];
                const std::size_t cols = pm.shape[1];
                if (pm.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) pm.adjoint[i] += n.adjoint[i];
                }
                if (pv.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pv.adjoint[i % cols] += n.adjoint[i];
                    }
                }
                break;
            }
            case Op::relu: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                    if (p.values[i] > 0.0) p.adjoint[i] += n.adjoint[i];
                }
                break;
            }
            case Op::sigmoid: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const double fault = testing::sigmoid_vjp_fault;
                for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                    const double y = n.values[i];
                    p.adjoint[i] += n.adjoint[i] * y * (1.0 - y) * fault;
                }
                break;
            }
            case Op::softmax: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t cols = n.shape.back();
                const std::size_t rows = n.values.size() / cols;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double* y = n.values.data() + r * cols;
                    const double* dy = n.adjoint.data() + r * cols;
                    double* dx = p.adjoint.data() + r * cols;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) dot += dy[j] * y[j];
                    for (std::size_t j = 0; j < cols; ++j) dx[j] += y[j] * (dy[j] - dot);
                }
                break;
            }
            case Op::mean: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const double g = n.adjoint[0] / static_cast<double>(p.values.size());
                for (double& d : p.adjoint) d += g;
                break;
            }
            case Op::sum: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const double g = n.adjoint[0];
                for (double& d : p.adjoint) d += g;
                break;
            }
            case Op::log: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                    p.adjoint[i] += n.adjoint[i] / p.values[i];
                }
                break;
            }
            case Op::cross_entropy: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t batch = p.shape[0], classes = p.shape[1];
                const double g = n.adjoint[0] / static_cast<double>(batch);
                for (std::size_t b = 0; b < batch; ++b) {
                    const double* z = p.values.data() + b * classes;
                    double* dz = p.adjoint.data() + b * classes;
                    const double mx = *std::max_element(z, z + classes);
                    double total = 0.0;
                    for (std::size_t c = 0; c < classes; ++c) total += std::exp(z[c] - mx);
                    for (std::size_t c = 0; c < classes; ++c) {
                        const double prob = std::exp(z[c] - mx) / total;
                        const double onehot =
                            (static_cast<std::size_t>(n.labels[b]) == c) ? 1.0 : 0.0;
                        dz[c] += g * (prob - onehot);
                    }
                }
                break;
            }
            case Op::scale: {
                TapeNode& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                    p.adjoint[i] += n.factor * n.adjoint[i];
                }
                break;
            }
            case Op::leaf:
            case Op::stop_grad:
                break;
        }
    }

    void mul_backward(MulKind kind, TapeNode& pa, TapeNode& pb, const TapeNode& n) {
        switch (kind) {
            case MulKind::elementwise:
                if (pa.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pa.adjoint[i] += n.adjoint[i] * pb.values[i];
                    }
                }
                if (pb.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pb.adjoint[i] += n.adjoint[i] * pa.values[i];
                    }
                }
                break;
            case MulKind::scalar_left:
                if (pa.requires_grad) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) s += n.adjoint[i] * pb.values[i];
                    pa.adjoint[0] += s;
                }
                if (pb.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pb.adjoint[i] += n.adjoint[i] * pa.values[0];
                    }
                }
                break;
            case MulKind::scalar_right:
                if (pb.requires_grad) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) s += n.adjoint[i] * pa.values[i];
                    pb.adjoint[0] += s;
                }
                if (pa.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pa.adjoint[i] += n.adjoint[i] * pb.values[0];
                    }
                }
                break;
            case MulKind::vec_mat: {
                const std::size_t cols = pa.shape[0];
                if (pa.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pa.adjoint[i % cols] += n.adjoint[i] * pb.values[i];
                    }
                }
                if (pb.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pb.adjoint[i] += n.adjoint[i] * pa.values[i % cols];
                    }
                }
                break;
            }
            case MulKind::mat_vec: {
                const std::size_t cols = pb.shape[0];
                if (pb.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pb.adjoint[i % cols] += n.adjoint[i] * pa.values[i];
                    }
                }
                if (pa.requires_grad) {
                    for (std::size_t i = 0; i < n.adjoint.size(); ++i) {
                        pa.adjoint[i] += n.adjoint[i] * pb.values[i % cols];
                    }
                }
                break;
            }
        }
    }
};

}  // namespace ad
}  // namespace hyperlearn
