#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "stx/error.hpp"

namespace stx::ad {

// Minimal reverse-mode tape over vector-valued nodes, sized for the
// backprojection network: dense layers, elementwise nonlinearities, dot
// products, softmax over a record set, and an L1 loss. Activations live on
// the tape; parameters are external buffers referenced by the ops, with
// gradient accumulation into caller-owned buffers of the same shape.
//
// Buffers are reused across reset() calls, so a steady-state training loop
// performs no per-item allocation.
class Tape {
public:
    using Var = uint32_t;

    Var input(const double* data, int n) {
        Var v = alloc(n);
        std::copy(data, data + n, value_ptr(v));
        return v;
    }

    // y = W x + b; W is row-major m x n, b may be null. dW/db may be null
    // when gradients for that tensor are not wanted.
    Var linear(const double* W, double* dW, const double* b, double* db, int m, int n, Var x) {
        Var y = alloc(m);
        const double* xv = value_ptr(x);
        double* yv = value_ptr(y);
        for (int i = 0; i < m; ++i) {
            const double* row = W + size_t(i) * n;
            double acc = b ? b[i] : 0.0;
            for (int j = 0; j < n; ++j) acc += row[j] * xv[j];
            yv[i] = acc;
        }
        push_op({OpKind::linear, y, x, kNoVar, W, dW, db, m, n, 0, 0, 0.0});
        return y;
    }

    Var add(Var a, Var b) {
        int n = node(a).size;
        Var y = alloc(n);
        const double* av = value_ptr(a);
        const double* bv = value_ptr(b);
        double* yv = value_ptr(y);
        for (int i = 0; i < n; ++i) yv[i] = av[i] + bv[i];
        push_op({OpKind::add, y, a, b, nullptr, nullptr, nullptr, n, 0, 0, 0, 0.0});
        return y;
    }

    Var softplus(Var x) {
        int n = node(x).size;
        Var y = alloc(n);
        const double* xv = value_ptr(x);
        double* yv = value_ptr(y);
        for (int i = 0; i < n; ++i) yv[i] = softplus_val(xv[i]);
        push_op({OpKind::softplus, y, x, kNoVar, nullptr, nullptr, nullptr, n, 0, 0, 0, 0.0});
        return y;
    }

    Var sigmoid(Var x) {
        int n = node(x).size;
        Var y = alloc(n);
        const double* xv = value_ptr(x);
        double* yv = value_ptr(y);
        for (int i = 0; i < n; ++i) yv[i] = sigmoid_val(xv[i]);
        push_op({OpKind::sigmoid, y, x, kNoVar, nullptr, nullptr, nullptr, n, 0, 0, 0, 0.0});
        return y;
    }

    Var dot(Var a, Var b) {
        int n = node(a).size;
        Var y = alloc(1);
        const double* av = value_ptr(a);
        const double* bv = value_ptr(b);
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += av[i] * bv[i];
        *value_ptr(y) = acc;
        push_op({OpKind::dot, y, a, b, nullptr, nullptr, nullptr, n, 0, 0, 0, 0.0});
        return y;
    }

    Var scale(Var x, double c) {
        int n = node(x).size;
        Var y = alloc(n);
        const double* xv = value_ptr(x);
        double* yv = value_ptr(y);
        for (int i = 0; i < n; ++i) yv[i] = xv[i] * c;
        push_op({OpKind::scale, y, x, kNoVar, nullptr, nullptr, nullptr, n, 0, 0, 0, c});
        return y;
    }

    // Softmax over scalar logit vars; returns one vector node of weights.
    Var softmax(const std::vector<Var>& logits) {
        int k = int(logits.size());
        Var y = alloc(k);
        uint32_t off = push_aux(logits);
        double* yv = value_ptr(y);
        double mx = -1e300;
        for (int i = 0; i < k; ++i) mx = std::max(mx, *value_ptr(logits[size_t(i)]));
        double sum = 0;
        for (int i = 0; i < k; ++i) {
            yv[i] = std::exp(*value_ptr(logits[size_t(i)]) - mx);
            sum += yv[i];
        }
        for (int i = 0; i < k; ++i) yv[i] /= sum;
        push_op({OpKind::softmax, y, kNoVar, kNoVar, nullptr, nullptr, nullptr, k, 0, off, uint32_t(k), 0.0});
        return y;
    }

    // y = sum_i weights[i] * values[i]; all values share one size.
    Var weighted_sum(Var weights, const std::vector<Var>& values) {
        int k = int(values.size());
        int n = node(values[0]).size;
        Var y = alloc(n);
        uint32_t off = push_aux(values);
        const double* wv = value_ptr(weights);
        double* yv = value_ptr(y);
        std::fill(yv, yv + n, 0.0);
        for (int i = 0; i < k; ++i) {
            const double* vv = value_ptr(values[size_t(i)]);
            for (int j = 0; j < n; ++j) yv[j] += wv[i] * vv[j];
        }
        push_op({OpKind::weighted_sum, y, weights, kNoVar, nullptr, nullptr, nullptr, n, 0, off, uint32_t(k), 0.0});
        return y;
    }

    // Mean absolute difference against a constant target; the subgradient at
    // zero is defined as zero.
    Var l1_loss(Var x, const double* target, int n) {
        Var y = alloc(1);
        const double* xv = value_ptr(x);
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += std::abs(xv[i] - target[i]);
        *value_ptr(y) = acc / n;
        aux_const_.push_back(target);
        push_op({OpKind::l1, y, x, kNoVar, nullptr, nullptr, nullptr, n, 0, uint32_t(aux_const_.size() - 1), 0,
                 0.0});
        return y;
    }

    const double* value_ptr(Var v) const { return values_.data() + node(v).offset; }
    double* value_ptr(Var v) { return values_.data() + node(v).offset; }
    int size(Var v) const { return node(v).size; }
    double scalar(Var v) const { return *value_ptr(v); }

    // Reverse pass from `root` with the given seed gradient (e.g. 1/batch).
    void backward(Var root, double seed = 1.0) {
        grads_.assign(values_.size(), 0.0);
        grad_ptr(root)[0] = seed;
        for (size_t oi = ops_.size(); oi-- > 0;) {
            const Op& op = ops_[oi];
            const double* gy = grad_ptr(op.y);
            switch (op.kind) {
                case OpKind::linear: {
                    const double* xv = value_ptr(op.a);
                    double* gx = grad_ptr(op.a);
                    for (int i = 0; i < op.m; ++i) {
                        double g = gy[i];
                        if (g == 0.0) continue;
                        const double* row = op.W + size_t(i) * op.n;
                        if (op.dW) {
                            double* drow = op.dW + size_t(i) * op.n;
                            for (int j = 0; j < op.n; ++j) drow[j] += g * xv[j];
                        }
                        if (op.db) op.db[i] += g;
                        for (int j = 0; j < op.n; ++j) gx[j] += row[j] * g;
                    }
                    break;
                }
                case OpKind::add: {
                    double* ga = grad_ptr(op.a);
                    double* gb = grad_ptr(op.b);
                    for (int i = 0; i < op.m; ++i) {
                        ga[i] += gy[i];
                        gb[i] += gy[i];
                    }
                    break;
                }
                case OpKind::softplus: {
                    const double* xv = value_ptr(op.a);
                    double* gx = grad_ptr(op.a);
                    for (int i = 0; i < op.m; ++i) gx[i] += sigmoid_val(xv[i]) * gy[i];
                    break;
                }
                case OpKind::sigmoid: {
                    const double* yv = value_ptr(op.y);
                    double* gx = grad_ptr(op.a);
                    for (int i = 0; i < op.m; ++i) gx[i] += yv[i] * (1.0 - yv[i]) * gy[i];
                    break;
                }
                case OpKind::dot: {
                    const double* av = value_ptr(op.a);
                    const double* bv = value_ptr(op.b);
                    double* ga = grad_ptr(op.a);
                    double* gb = grad_ptr(op.b);
                    double g = gy[0];
                    for (int i = 0; i < op.m; ++i) {
                        ga[i] += bv[i] * g;
                        gb[i] += av[i] * g;
                    }
                    break;
                }
                case OpKind::scale: {
                    double* gx = grad_ptr(op.a);
                    for (int i = 0; i < op.m; ++i) gx[i] += op.c * gy[i];
                    break;
                }
                case OpKind::softmax: {
                    const double* yv = value_ptr(op.y);
                    double dotg = 0;
                    for (int i = 0; i < op.m; ++i) dotg += gy[i] * yv[i];
                    for (uint32_t i = 0; i < op.aux_count; ++i) {
                        Var logit = aux_vars_[op.aux_off + i];
                        grad_ptr(logit)[0] += yv[i] * (gy[i] - dotg);
                    }
                    break;
                }
                case OpKind::weighted_sum: {
                    const double* wv = value_ptr(op.a);
                    double* gw = grad_ptr(op.a);
                    for (uint32_t i = 0; i < op.aux_count; ++i) {
                        Var val = aux_vars_[op.aux_off + i];
                        const double* vv = value_ptr(val);
                        double* gv = grad_ptr(val);
                        double acc = 0;
                        for (int j = 0; j < op.m; ++j) {
                            acc += gy[j] * vv[j];
                            gv[j] += wv[i] * gy[j];
                        }
                        gw[i] += acc;
                    }
                    break;
                }
                case OpKind::l1: {
                    const double* xv = value_ptr(op.a);
                    const double* tgt = aux_const_[op.aux_off];
                    double* gx = grad_ptr(op.a);
                    double g = gy[0] / op.m;
                    for (int i = 0; i < op.m; ++i) {
                        double d = xv[i] - tgt[i];
                        gx[i] += d > 0 ? g : (d < 0 ? -g : 0.0);
                    }
                    break;
                }
            }
        }
    }

    void reset() {
        nodes_.clear();
        ops_.clear();
        values_.clear();
        grads_.clear();
        aux_vars_.clear();
        aux_const_.clear();
    }

    static double softplus_val(double x) {
        if (x > 30.0) return x;
        if (x < -30.0) return std::exp(x);
        return std::log1p(std::exp(x));
    }
    static double sigmoid_val(double x) { return 1.0 / (1.0 + std::exp(-x)); }

private:
    enum class OpKind : uint8_t { linear, add, softplus, sigmoid, dot, scale, softmax, weighted_sum, l1 };
    static constexpr Var kNoVar = 0xffffffffu;

    struct Node {
        uint32_t offset;
        int size;
    };
    struct Op {
        OpKind kind;
        Var y, a, b;
        const double* W;
        double* dW;
        double* db;
        int m, n;
        uint32_t aux_off, aux_count;
        double c;
    };

    Var alloc(int n) {
        Node nd{uint32_t(values_.size()), n};
        values_.resize(values_.size() + size_t(n), 0.0);
        nodes_.push_back(nd);
        return Var(nodes_.size() - 1);
    }
    const Node& node(Var v) const { return nodes_[v]; }
    double* grad_ptr(Var v) { return grads_.data() + node(v).offset; }
    uint32_t push_aux(const std::vector<Var>& vars) {
        uint32_t off = uint32_t(aux_vars_.size());
        aux_vars_.insert(aux_vars_.end(), vars.begin(), vars.end());
        return off;
    }
    void push_op(Op op) { ops_.push_back(op); }

    std::vector<Node> nodes_;
    std::vector<Op> ops_;
    std::vector<double> values_;
    std::vector<double> grads_;
    std::vector<Var> aux_vars_;
    std::vector<const double*> aux_const_;
};

}  // namespace stx::ad
