// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vidcap::ad {

// Dense double-precision tensor, rank 1 or 2, row-major. Gradient buffer is
// allocated lazily and accumulates additively across backward passes until
// zeroed by the owner.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> val;
    std::vector<double> grad;
    bool requires_grad = false;
    std::string name;  // set for named parameters only

    Tensor() = default;
    Tensor(std::vector<int> s, bool req);

    int numel() const;
    int rows() const { return shape.empty() ? 0 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
    void ensure_grad();
    void zero_grad();
    void fill(double v);
    void set(std::span<const double> values);
};

std::string shape_str(const Tensor& t);

// Eager reverse-mode graph. Ops compute forward immediately and record a
// backward closure; backward() replays them in reverse creation order, which
// is a valid topological order by construction. A graph owns its intermediate
// nodes; parameter tensors live outside and just receive gradient.
class Graph {
  public:
    explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    bool grad_enabled() const { return grad_enabled_; }

    // Leaf owned by this graph (an input).
    Tensor* leaf(std::vector<int> shape, bool requires_grad = false);
    Tensor* leaf(std::vector<int> shape, std::span<const double> values,
                 bool requires_grad = false);

    Tensor* matmul(Tensor* a, Tensor* b);
    Tensor* add(Tensor* a, Tensor* b);
    Tensor* sub(Tensor* a, Tensor* b);
    Tensor* add_bias(Tensor* m, Tensor* bias);  // broadcast bias over rows
    Tensor* hadamard(Tensor* a, Tensor* b);
    Tensor* scale(Tensor* a, double c);
    Tensor* sigmoid(Tensor* a);
    Tensor* tanh_(Tensor* a);
    Tensor* softmax(Tensor* a);  // rank-1, max-subtracted
    Tensor* concat(const std::vector<Tensor*>& parts);       // rank-1
    Tensor* concat_cols(const std::vector<Tensor*>& parts);  // rank-2, same rows
    Tensor* slice(Tensor* a, int begin, int len);            // rank-1
    Tensor* lookup(Tensor* table, int row);                  // row of a rank-2 table
    Tensor* sum(Tensor* a);
    Tensor* mean_rows(Tensor* m);  // [N x d] -> [d]
    Tensor* l1diff(Tensor* a, Tensor* b);
    // L1 of adjacent-row differences (rank 2) or adjacent components (rank 1).
    Tensor* coherent_l1(Tensor* a);
    Tensor* cross_entropy(Tensor* logits, int target);  // -log softmax(logits)[target]
    Tensor* bce_with_logits(Tensor* logits, std::span<const double> targets);

    struct LstmParams {
        Tensor* w_ih = nullptr;  // [4H x X], gate order i, f, g, o
        Tensor* w_hh = nullptr;  // [4H x H]
        Tensor* bias = nullptr;  // [4H]
    };
    // Standard LSTM recurrence; returns (h, c).
    std::pair<Tensor*, Tensor*> lstm_cell(Tensor* x, Tensor* h_prev, Tensor* c_prev,
                                          const LstmParams& p);

    // Populates gradients of everything the loss depends on. The loss must be
    // scalar; calling backward twice on one graph is an error.
    void backward(Tensor* loss);

    std::size_t size() const { return nodes_.size(); }

  private:
    Tensor* make_node(std::vector<int> shape, std::initializer_list<Tensor*> parents);
    void record(Tensor* out, std::function<void()> fn);

    bool grad_enabled_;
    bool backward_done_ = false;
    std::vector<std::unique_ptr<Tensor>> nodes_;
    std::vector<std::function<void()>> back_;
};

// Max relative error between analytic gradients and central finite
// differences of `build` (which must deterministically rebuild the same
// scalar loss from the current parameter values). Throws on non-finite
// values.
double grad_check(const std::function<Tensor*(Graph&)>& build, std::span<Tensor* const> params,
                  double eps = 1e-5);

}  // namespace vidcap::ad
