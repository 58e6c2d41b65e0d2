#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgfa/tensor.hpp"

namespace dgfa {

// Reverse-mode tape over dense tensors. One tape per forward/backward pass;
// independent tapes may run concurrently. Gradients accumulate additively at
// fan-out; backward visits each node exactly once in reverse record order.
class Tape {
public:
    using Var = int;

    Var input(Tensor value);

    const Tensor& val(Var v) const { return vals_[v]; }
    const Tensor& grad(Var v) const { return grads_[v]; }

    // Seeds d(loss)/d(loss) = 1 and propagates. loss must be a scalar.
    void backward(Var loss);

    // --- primitives ---
    Var linear(Var x, Var w, Var b);                  // (M,Ci) x (Ci,Co) + (Co)
    Var relu(Var x);
    Var add(Var a, Var b);                            // same shape
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var x, double c);
    Var scale_rows(Var x, Var s);                     // (M,C) scaled by (M) or (M,1)
    Var concat_cols(const std::vector<Var>& xs);
    Var gather_rows(Var x, std::vector<int> idx);     // backward scatter-adds
    Var reduce_max_groups(Var x, int group);          // (G*K,C) -> (G,C); ties to first
    Var reduce_sum_groups(Var x, int group);
    Var reduce_mean_groups(Var x, int group);
    Var softmax_groups(Var x, int group);             // (G*K) or (G*K,1), softmax per group
    Var softmax_cross_entropy(Var logits, const std::vector<int>& labels, bool mean);
    // Fixed-weight interpolation: out[f] = sum_t w[f*kn+t] * coarse[idx[f*kn+t]].
    Var idw_apply(Var coarse, std::vector<int> idx, std::vector<double> w, int kn);
    Var weighted_sum(const std::vector<Var>& scalars, const std::vector<double>& weights);

private:
    struct Node {
        std::function<void()> back;  // empty for leaves
    };
    Var emplace(Tensor value, std::function<void()> back = {});
    Tensor& grad_mut(Var v) { return grads_[v]; }

    std::vector<Tensor> vals_;
    std::vector<Tensor> grads_;
    std::vector<Node> nodes_;
};

// Named parameter tensors with gradient and Adam state slots.
struct ParamStore {
    struct Entry {
        std::string name;
        Tensor value, grad, m, v;
    };
    std::vector<Entry> entries;
    std::unordered_map<std::string, int> by_name;

    int add(const std::string& name, Tensor init);
    Entry& at(const std::string& name);
    const Entry& at(const std::string& name) const;
    void zero_grad();

    // Push every parameter onto a tape; returns leaf ids in entry order.
    std::vector<Tape::Var> stage(Tape& t) const;
    // Copy tape gradients (for leaves from stage()) back into entry.grad.
    void collect(const Tape& t, const std::vector<Tape::Var>& ids);
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    long long checked = 0;
    long long skipped = 0;
};

// Central-difference check of the tape gradient of a scalar-valued composite.
// build() must be deterministic. Elements whose eps and 2*eps difference
// quotients disagree (max-tie or relu kink within the probe window) are
// skipped and counted.
GradCheckResult grad_check(ParamStore& store,
                           const std::function<Tape::Var(Tape&, const std::vector<Tape::Var>&)>& build,
                           double eps);

}  // namespace dgfa
