// SPDX-License-Identifier: Apache-2.0
#include "vidcap/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vidcap/kernels.hpp"

namespace vidcap::ad {

namespace {

double stable_softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid_scalar(double z) { return 1.0 / (1.0 + std::exp(-z)); }

[[noreturn]] void shape_error(const std::string& op, const Tensor& a) {
    throw std::invalid_argument("autodiff: " + op + ": bad shape " + shape_str(a));
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument("autodiff: " + op + ": incompatible shapes " + shape_str(a) +
                                " and " + shape_str(b));
}

}  // namespace

Tensor::Tensor(std::vector<int> s, bool req) : shape(std::move(s)), requires_grad(req) {
    int n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("autodiff: non-positive dimension");
        n *= d;
    }
    if (shape.empty() || shape.size() > 2) {
        throw std::invalid_argument("autodiff: rank must be 1 or 2");
    }
    val.assign(n, 0.0);
    if (requires_grad) grad.assign(n, 0.0);
}

int Tensor::numel() const {
    int n = 1;
    for (int d : shape) n *= d;
    return n;
}

void Tensor::ensure_grad() {
    if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(val.size(), 0.0); }

void Tensor::fill(double v) { std::fill(val.begin(), val.end(), v); }

void Tensor::set(std::span<const double> values) {
    if (values.size() != val.size()) {
        throw std::invalid_argument("autodiff: set(): size mismatch");
    }
    std::copy(values.begin(), values.end(), val.begin());
}

std::string shape_str(const Tensor& t) {
    std::string s = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(t.shape[i]);
    }
    return s + "]";
}

Tensor* Graph::make_node(std::vector<int> shape, std::initializer_list<Tensor*> parents) {
    bool req = false;
    if (grad_enabled_) {
        for (Tensor* p : parents) req = req || (p && p->requires_grad);
    }
    nodes_.push_back(std::make_unique<Tensor>(std::move(shape), req));
    Tensor* out = nodes_.back().get();
    return out;
}

void Graph::record(Tensor* out, std::function<void()> fn) {
    if (out->requires_grad) back_.push_back(std::move(fn));
}

Tensor* Graph::leaf(std::vector<int> shape, bool requires_grad) {
    nodes_.push_back(std::make_unique<Tensor>(std::move(shape), requires_grad && grad_enabled_));
    return nodes_.back().get();
}

Tensor* Graph::leaf(std::vector<int> shape, std::span<const double> values, bool requires_grad) {
    Tensor* t = leaf(std::move(shape), requires_grad);
    t->set(values);
    return t;
}

Tensor* Graph::matmul(Tensor* a, Tensor* b) {
    // Treat rank-1 operands as a row (lhs) or column (rhs).
    const int m = a->shape.size() == 2 ? a->shape[0] : 1;
    const int k = a->shape.size() == 2 ? a->shape[1] : a->shape[0];
    const int kb = b->shape.size() == 2 ? b->shape[0] : b->shape[0];
    const int n = b->shape.size() == 2 ? b->shape[1] : 1;
    if (k != kb || (a->shape.size() == 1 && b->shape.size() == 1)) {
        shape_error("matmul", *a, *b);
    }

    std::vector<int> out_shape;
    if (a->shape.size() == 2 && b->shape.size() == 2) out_shape = {m, n};
    else if (a->shape.size() == 2) out_shape = {m};
    else out_shape = {n};

    Tensor* out = make_node(out_shape, {a, b});
    kernels::matmul(a->val, b->val, out->val, m, k, n);
    record(out, [a, b, out, m, k, n] {
        if (a->requires_grad) {
            a->ensure_grad();
            kernels::matmul_nt_acc(out->grad, b->val, a->grad, m, k, n);
        }
        if (b->requires_grad) {
            b->ensure_grad();
            kernels::matmul_tn_acc(a->val, out->grad, b->grad, m, k, n);
        }
    });
    return out;
}

Tensor* Graph::add(Tensor* a, Tensor* b) {
    if (a->shape != b->shape) shape_error("add", *a, *b);
    Tensor* out = make_node(a->shape, {a, b});
    for (int i = 0; i < out->numel(); ++i) out->val[i] = a->val[i] + b->val[i];
    record(out, [a, b, out] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (int i = 0; i < out->numel(); ++i) a->grad[i] += out->grad[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (int i = 0; i < out->numel(); ++i) b->grad[i] += out->grad[i];
        }
    });
    return out;
}

Tensor* Graph::sub(Tensor* a, Tensor* b) {
    if (a->shape != b->shape) shape_error("sub", *a, *b);
    Tensor* out = make_node(a->shape, {a, b});
    for (int i = 0; i < out->numel(); ++i) out->val[i] = a->val[i] - b->val[i];
    record(out, [a, b, out] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (int i = 0; i < out->numel(); ++i) a->grad[i] += out->grad[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (int i = 0; i < out->numel(); ++i) b->grad[i] -= out->grad[i];
        }
    });
    return out;
}

Tensor* Graph::add_bias(Tensor* m, Tensor* bias) {
    if (m->shape.size() != 2 || bias->shape.size() != 1 || bias->shape[0] != m->shape[1]) {
        shape_error("add_bias", *m, *bias);
    }
    const int rows = m->shape[0], cols = m->shape[1];
    Tensor* out = make_node(m->shape, {m, bias});
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out->val[r * cols + c] = m->val[r * cols + c] + bias->val[c];
        }
    }
    record(out, [m, bias, out, rows, cols] {
        if (m->requires_grad) {
            m->ensure_grad();
            for (int i = 0; i < rows * cols; ++i) m->grad[i] += out->grad[i];
        }
        if (bias->requires_grad) {
            bias->ensure_grad();
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) bias->grad[c] += out->grad[r * cols + c];
            }
        }
    });
    return out;
}

Tensor* Graph::hadamard(Tensor* a, Tensor* b) {
    if (a->shape != b->shape) shape_error("hadamard", *a, *b);
    Tensor* out = make_node(a->shape, {a, b});
    for (int i = 0; i < out->numel(); ++i) out->val[i] = a->val[i] * b->val[i];
    record(out, [a, b, out] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (int i = 0; i < out->numel(); ++i) a->grad[i] += out->grad[i] * b->val[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (int i = 0; i < out->numel(); ++i) b->grad[i] += out->grad[i] * a->val[i];
        }
    });
    return out;
}

Tensor* Graph::scale(Tensor* a, double c) {
    Tensor* out = make_node(a->shape, {a});
    for (int i = 0; i < out->numel(); ++i) out->val[i] = c * a->val[i];
    record(out, [a, out, c] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (int i = 0; i < out->numel(); ++i) a->grad[i] += c * out->grad[i];
    });
    return out;
}

Tensor* Graph::sigmoid(Tensor* a) {
    Tensor* out = make_node(a->shape, {a});
    for (int i = 0; i < out->numel(); ++i) out->val[i] = sigmoid_scalar(a->val[i]);
    record(out, [a, out] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (int i = 0; i < out->numel(); ++i) {
            a->grad[i] += out->grad[i] * out->val[i] * (1.0 - out->val[i]);
        }
    });
    return out;
}

Tensor* Graph::tanh_(Tensor* a) {
    Tensor* out = make_node(a->shape, {a});
    for (int i = 0; i < out->numel(); ++i) out->val[i] = std::tanh(a->val[i]);
    record(out, [a, out] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (int i = 0; i < out->numel(); ++i) {
            a->grad[i] += out->grad[i] * (1.0 - out->val[i] * out->val[i]);
        }
    });
    return out;
}

Tensor* Graph::softmax(Tensor* a) {
    if (a->shape.size() != 1) shape_error("softmax", *a);
    Tensor* out = make_node(a->shape, {a});
    const int n = a->numel();
    double mx = a->val[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, a->val[i]);
    double denom = 0.0;
    for (int i = 0; i < n; ++i) {
        out->val[i] = std::exp(a->val[i] - mx);
        denom += out->val[i];
    }
    for (int i = 0; i < n; ++i) out->val[i] /= denom;
    record(out, [a, out, n] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += out->grad[i] * out->val[i];
        for (int i = 0; i < n; ++i) a->grad[i] += out->val[i] * (out->grad[i] - dot);
    });
    return out;
}

Tensor* Graph::concat(const std::vector<Tensor*>& parts) {
    if (parts.empty()) throw std::invalid_argument("autodiff: concat: no parts");
    int total = 0;
    bool req = false;
    for (Tensor* p : parts) {
        if (p->shape.size() != 1) shape_error("concat", *p);
        total += p->shape[0];
        req = req || p->requires_grad;
    }
    nodes_.push_back(std::make_unique<Tensor>(std::vector<int>{total}, req && grad_enabled_));
    Tensor* out = nodes_.back().get();
    int off = 0;
    for (Tensor* p : parts) {
        std::copy(p->val.begin(), p->val.end(), out->val.begin() + off);
        off += p->shape[0];
    }
    if (out->requires_grad) {
        std::vector<Tensor*> ps = parts;
        back_.push_back([ps, out] {
            int off = 0;
            for (Tensor* p : ps) {
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (int i = 0; i < p->shape[0]; ++i) p->grad[i] += out->grad[off + i];
                }
                off += p->shape[0];
            }
        });
    }
    return out;
}

Tensor* Graph::concat_cols(const std::vector<Tensor*>& parts) {
    if (parts.empty()) throw std::invalid_argument("autodiff: concat_cols: no parts");
    const int rows = parts[0]->shape.size() == 2 ? parts[0]->shape[0] : 0;
    int total_cols = 0;
    bool req = false;
    for (Tensor* p : parts) {
        if (p->shape.size() != 2 || p->shape[0] != rows) shape_error("concat_cols", *p);
        total_cols += p->shape[1];
        req = req || p->requires_grad;
    }
    nodes_.push_back(
        std::make_unique<Tensor>(std::vector<int>{rows, total_cols}, req && grad_enabled_));
    Tensor* out = nodes_.back().get();
    int off = 0;
    for (Tensor* p : parts) {
        const int pc = p->shape[1];
        for (int r = 0; r < rows; ++r) {
            std::copy(p->val.begin() + r * pc, p->val.begin() + (r + 1) * pc,
                      out->val.begin() + r * total_cols + off);
        }
        off += pc;
    }
    if (out->requires_grad) {
        std::vector<Tensor*> ps = parts;
        back_.push_back([ps, out, rows, total_cols] {
            int off = 0;
            for (Tensor* p : ps) {
                const int pc = p->shape[1];
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (int r = 0; r < rows; ++r) {
                        for (int c = 0; c < pc; ++c) {
                            p->grad[r * pc + c] += out->grad[r * total_cols + off + c];
                        }
                    }
                }
                off += pc;
            }
        });
    }
    return out;
}

Tensor* Graph::slice(Tensor* a, int begin, int len) {
    if (a->shape.size() != 1 || begin < 0 || len <= 0 || begin + len > a->shape[0]) {
        shape_error("slice", *a);
    }
    Tensor* out = make_node({len}, {a});
    std::copy(a->val.begin() + begin, a->val.begin() + begin + len, out->val.begin());
    record(out, [a, out, begin, len] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (int i = 0; i < len; ++i) a->grad[begin + i] += out->grad[i];
    });
    return out;
}

Tensor* Graph::lookup(Tensor* table, int row) {
    if (table->shape.size() != 2 || row < 0 || row >= table->shape[0]) {
        throw std::invalid_argument("autodiff: lookup: row " + std::to_string(row) +
                                    " out of range for " + shape_str(*table));
    }
    const int cols = table->shape[1];
    Tensor* out = make_node({cols}, {table});
    std::copy(table->val.begin() + row * cols, table->val.begin() + (row + 1) * cols,
              out->val.begin());
    record(out, [table, out, row, cols] {
        if (!table->requires_grad) return;
        table->ensure_grad();
        for (int i = 0; i < cols; ++i) table->grad[row * cols + i] += out->grad[i];
    });
    return out;
}

Tensor* Graph::sum(Tensor* a) {
    Tensor* out = make_node({1}, {a});
    double s = 0.0;
    for (double v : a->val) s += v;
    out->val[0] = s;
    record(out, [a, out] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (int i = 0; i < a->numel(); ++i) a->grad[i] += out->grad[0];
    });
    return out;
}

Tensor* Graph::mean_rows(Tensor* m) {
    if (m->shape.size() != 2) shape_error("mean_rows", *m);
    const int rows = m->shape[0], cols = m->shape[1];
    Tensor* out = make_node({cols}, {m});
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out->val[c] += m->val[r * cols + c];
    }
    for (int c = 0; c < cols; ++c) out->val[c] /= rows;
    record(out, [m, out, rows, cols] {
        if (!m->requires_grad) return;
        m->ensure_grad();
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) m->grad[r * cols + c] += out->grad[c] / rows;
        }
    });
    return out;
}

Tensor* Graph::l1diff(Tensor* a, Tensor* b) {
    if (a->shape != b->shape) shape_error("l1diff", *a, *b);
    Tensor* out = make_node({1}, {a, b});
    double s = 0.0;
    for (int i = 0; i < a->numel(); ++i) s += std::abs(a->val[i] - b->val[i]);
    out->val[0] = s;
    record(out, [a, b, out] {
        for (int i = 0; i < a->numel(); ++i) {
            const double d = a->val[i] - b->val[i];
            const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad[i] += out->grad[0] * sgn;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad[i] -= out->grad[0] * sgn;
            }
        }
    });
    return out;
}

Tensor* Graph::coherent_l1(Tensor* a) {
    const int rows = a->shape[0];
    const int cols = a->shape.size() == 2 ? a->shape[1] : 1;
    if (rows < 2) {
        throw std::invalid_argument("autodiff: coherent_l1 needs at least 2 rows, got " +
                                    shape_str(*a));
    }
    Tensor* out = make_node({1}, {a});
    double s = 0.0;
    for (int r = 1; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            s += std::abs(a->val[r * cols + c] - a->val[(r - 1) * cols + c]);
        }
    }
    out->val[0] = s;
    record(out, [a, out, rows, cols] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (int r = 1; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double d = a->val[r * cols + c] - a->val[(r - 1) * cols + c];
                const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                a->grad[r * cols + c] += out->grad[0] * sgn;
                a->grad[(r - 1) * cols + c] -= out->grad[0] * sgn;
            }
        }
    });
    return out;
}

Tensor* Graph::cross_entropy(Tensor* logits, int target) {
    if (logits->shape.size() != 1 || target < 0 || target >= logits->shape[0]) {
        throw std::invalid_argument("autodiff: cross_entropy: target " + std::to_string(target) +
                                    " out of range for " + shape_str(*logits));
    }
    const int n = logits->shape[0];
    Tensor* out = make_node({1}, {logits});
    double mx = logits->val[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, logits->val[i]);
    double denom = 0.0;
    for (int i = 0; i < n; ++i) denom += std::exp(logits->val[i] - mx);
    const double lse = mx + std::log(denom);
    out->val[0] = lse - logits->val[target];
    record(out, [logits, out, target, n, mx, denom] {
        if (!logits->requires_grad) return;
        logits->ensure_grad();
        for (int i = 0; i < n; ++i) {
            const double p = std::exp(logits->val[i] - mx) / denom;
            logits->grad[i] += out->grad[0] * (p - (i == target ? 1.0 : 0.0));
        }
    });
    return out;
}

Tensor* Graph::bce_with_logits(Tensor* logits, std::span<const double> targets) {
    if (logits->shape.size() != 1 ||
        targets.size() != static_cast<std::size_t>(logits->shape[0])) {
        throw std::invalid_argument("autodiff: bce_with_logits: target size " +
                                    std::to_string(targets.size()) + " vs logits " +
                                    shape_str(*logits));
    }
    const int n = logits->shape[0];
    Tensor* out = make_node({1}, {logits});
    std::vector<double> y(targets.begin(), targets.end());
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += stable_softplus(logits->val[i]) - y[i] * logits->val[i];
    out->val[0] = s;
    record(out, [logits, out, y = std::move(y), n] {
        if (!logits->requires_grad) return;
        logits->ensure_grad();
        for (int i = 0; i < n; ++i) {
            logits->grad[i] += out->grad[0] * (sigmoid_scalar(logits->val[i]) - y[i]);
        }
    });
    return out;
}

std::pair<Tensor*, Tensor*> Graph::lstm_cell(Tensor* x, Tensor* h_prev, Tensor* c_prev,
                                             const LstmParams& p) {
    const int hidden = h_prev->shape[0];
    if (p.w_ih->shape.size() != 2 || p.w_ih->shape[0] != 4 * hidden ||
        p.w_ih->shape[1] != x->shape[0] || p.w_hh->shape[0] != 4 * hidden ||
        p.w_hh->shape[1] != hidden || p.bias->shape[0] != 4 * hidden) {
        shape_error("lstm_cell", *p.w_ih, *x);
    }
    Tensor* gates = add(add(matmul(p.w_ih, x), matmul(p.w_hh, h_prev)), p.bias);
    Tensor* i_gate = sigmoid(slice(gates, 0, hidden));
    Tensor* f_gate = sigmoid(slice(gates, hidden, hidden));
    Tensor* g_cand = tanh_(slice(gates, 2 * hidden, hidden));
    Tensor* o_gate = sigmoid(slice(gates, 3 * hidden, hidden));
    Tensor* c = add(hadamard(f_gate, c_prev), hadamard(i_gate, g_cand));
    Tensor* h = hadamard(o_gate, tanh_(c));
    return {h, c};
}

void Graph::backward(Tensor* loss) {
    if (loss->numel() != 1) {
        throw std::invalid_argument("autodiff: backward() needs a scalar loss, got " +
                                    shape_str(*loss));
    }
    if (backward_done_) {
        throw std::logic_error("autodiff: backward() called twice on one graph");
    }
    if (!loss->requires_grad) {
        throw std::logic_error("autodiff: loss does not require grad (detached graph?)");
    }
    backward_done_ = true;
    loss->ensure_grad();
    loss->grad[0] = 1.0;
    for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)();
}

double grad_check(const std::function<Tensor*(Graph&)>& build, std::span<Tensor* const> params,
                  double eps) {
    for (Tensor* p : params) p->zero_grad();
    std::vector<std::vector<double>> analytic;
    {
        Graph g;
        Tensor* loss = build(g);
        g.backward(loss);
        if (!std::isfinite(loss->val[0])) {
            throw std::runtime_error("grad_check: non-finite loss");
        }
        for (Tensor* p : params) {
            p->ensure_grad();
            analytic.push_back(p->grad);
        }
    }

    auto eval = [&]() {
        Graph g(false);
        Tensor* loss = build(g);
        if (!std::isfinite(loss->val[0])) {
            throw std::runtime_error("grad_check: non-finite loss");
        }
        return loss->val[0];
    };

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor* p = params[pi];
        for (int i = 0; i < p->numel(); ++i) {
            const double saved = p->val[i];
            p->val[i] = saved + eps;
            const double f1 = eval();
            p->val[i] = saved - eps;
            const double f2 = eval();
            p->val[i] = saved;
            const double numeric = (f1 - f2) / (2.0 * eps);
            const double a = analytic[pi][i];
            if (!std::isfinite(numeric) || !std::isfinite(a)) {
                throw std::runtime_error("grad_check: non-finite gradient");
            }
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    for (Tensor* p : params) p->zero_grad();
    return max_rel;
}

}  // namespace vidcap::ad
