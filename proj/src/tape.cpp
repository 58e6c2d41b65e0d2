#include "dgfa/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace dgfa {

Tape::Var Tape::emplace(Tensor value, std::function<void()> back) {
    vals_.push_back(std::move(value));
    grads_.emplace_back(vals_.back().shape, 0.0);
    nodes_.push_back({std::move(back)});
    return static_cast<Var>(vals_.size() - 1);
}

Tape::Var Tape::input(Tensor value) { return emplace(std::move(value)); }

void Tape::backward(Var loss) {
    if (vals_[loss].size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    for (auto& g : grads_) std::fill(g.data.begin(), g.data.end(), 0.0);
    grads_[loss].data[0] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i)
        if (nodes_[i].back) nodes_[i].back();
}

Tape::Var Tape::linear(Var x, Var w, Var b) {
    const Tensor& X = vals_[x];
    const Tensor& W = vals_[w];
    const Tensor& B = vals_[b];
    const int M = X.rows(), Ci = X.cols(), Co = W.cols();
    if (W.rows() != Ci || B.size() != Co)
        throw std::invalid_argument("linear: shape mismatch");
    Tensor Y({M, Co});
    for (int m = 0; m < M; ++m) {
        const double* xr = &X.data[static_cast<size_t>(m) * Ci];
        double* yr = &Y.data[static_cast<size_t>(m) * Co];
        for (int j = 0; j < Co; ++j) yr[j] = B.data[j];
        for (int k = 0; k < Ci; ++k) {
            const double xv = xr[k];
            const double* wr = &W.data[static_cast<size_t>(k) * Co];
            for (int j = 0; j < Co; ++j) yr[j] += xv * wr[j];
        }
    }
    Var out = emplace(std::move(Y), [this, x, w, b]() {});
    nodes_.back().back = [this, out, x, w, b]() {
        const Tensor& X = vals_[x];
        const Tensor& W = vals_[w];
        const Tensor& dY = grads_[out];
        Tensor& dX = grads_[x];
        Tensor& dW = grads_[w];
        Tensor& dB = grads_[b];
        const int M = X.rows(), Ci = X.cols(), Co = W.cols();
        for (int m = 0; m < M; ++m) {
            const double* dyr = &dY.data[static_cast<size_t>(m) * Co];
            const double* xr = &X.data[static_cast<size_t>(m) * Ci];
            double* dxr = &dX.data[static_cast<size_t>(m) * Ci];
            for (int k = 0; k < Ci; ++k) {
                const double* wr = &W.data[static_cast<size_t>(k) * Co];
                double acc = 0.0;
                for (int j = 0; j < Co; ++j) acc += dyr[j] * wr[j];
                dxr[k] += acc;
                double* dwr = &dW.data[static_cast<size_t>(k) * Co];
                const double xv = xr[k];
                for (int j = 0; j < Co; ++j) dwr[j] += xv * dyr[j];
            }
            for (int j = 0; j < Co; ++j) dB.data[j] += dyr[j];
        }
    };
    return out;
}

Tape::Var Tape::relu(Var x) {
    Tensor Y = vals_[x];
    for (double& v : Y.data) v = v > 0.0 ? v : 0.0;
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, x]() {
        const Tensor& X = vals_[x];
        const Tensor& dY = grads_[out];
        Tensor& dX = grads_[x];
        for (size_t i = 0; i < X.data.size(); ++i)
            if (X.data[i] > 0.0) dX.data[i] += dY.data[i];
    };
    return out;
}

Tape::Var Tape::add(Var a, Var b) {
    if (!vals_[a].same_shape(vals_[b])) throw std::invalid_argument("add: shape mismatch");
    Tensor Y = vals_[a];
    for (size_t i = 0; i < Y.data.size(); ++i) Y.data[i] += vals_[b].data[i];
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, a, b]() {
        const Tensor& dY = grads_[out];
        for (size_t i = 0; i < dY.data.size(); ++i) {
            grads_[a].data[i] += dY.data[i];
            grads_[b].data[i] += dY.data[i];
        }
    };
    return out;
}

Tape::Var Tape::sub(Var a, Var b) {
    if (!vals_[a].same_shape(vals_[b])) throw std::invalid_argument("sub: shape mismatch");
    Tensor Y = vals_[a];
    for (size_t i = 0; i < Y.data.size(); ++i) Y.data[i] -= vals_[b].data[i];
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, a, b]() {
        const Tensor& dY = grads_[out];
        for (size_t i = 0; i < dY.data.size(); ++i) {
            grads_[a].data[i] += dY.data[i];
            grads_[b].data[i] -= dY.data[i];
        }
    };
    return out;
}

Tape::Var Tape::mul(Var a, Var b) {
    if (!vals_[a].same_shape(vals_[b])) throw std::invalid_argument("mul: shape mismatch");
    Tensor Y = vals_[a];
    for (size_t i = 0; i < Y.data.size(); ++i) Y.data[i] *= vals_[b].data[i];
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, a, b]() {
        const Tensor& dY = grads_[out];
        for (size_t i = 0; i < dY.data.size(); ++i) {
            grads_[a].data[i] += dY.data[i] * vals_[b].data[i];
            grads_[b].data[i] += dY.data[i] * vals_[a].data[i];
        }
    };
    return out;
}

Tape::Var Tape::scale(Var x, double c) {
    Tensor Y = vals_[x];
    for (double& v : Y.data) v *= c;
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, x, c]() {
        const Tensor& dY = grads_[out];
        for (size_t i = 0; i < dY.data.size(); ++i) grads_[x].data[i] += c * dY.data[i];
    };
    return out;
}

Tape::Var Tape::scale_rows(Var x, Var s) {
    const Tensor& X = vals_[x];
    const Tensor& S = vals_[s];
    const int M = X.rows(), C = X.cols();
    if (S.size() != M) throw std::invalid_argument("scale_rows: scale length != row count");
    Tensor Y = X;
    for (int m = 0; m < M; ++m)
        for (int c = 0; c < C; ++c) Y.data[static_cast<size_t>(m) * C + c] *= S.data[m];
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, x, s]() {
        const Tensor& X = vals_[x];
        const Tensor& S = vals_[s];
        const Tensor& dY = grads_[out];
        const int M = X.rows(), C = X.cols();
        for (int m = 0; m < M; ++m) {
            double acc = 0.0;
            for (int c = 0; c < C; ++c) {
                const size_t i = static_cast<size_t>(m) * C + c;
                grads_[x].data[i] += dY.data[i] * S.data[m];
                acc += dY.data[i] * X.data[i];
            }
            grads_[s].data[m] += acc;
        }
    };
    return out;
}

Tape::Var Tape::concat_cols(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_cols: empty input list");
    const int M = vals_[xs[0]].rows();
    int total = 0;
    for (Var v : xs) {
        if (vals_[v].rows() != M) throw std::invalid_argument("concat_cols: row count mismatch");
        total += vals_[v].cols();
    }
    Tensor Y({M, total});
    int off = 0;
    for (Var v : xs) {
        const Tensor& X = vals_[v];
        const int C = X.cols();
        for (int m = 0; m < M; ++m)
            std::copy_n(&X.data[static_cast<size_t>(m) * C], C,
                        &Y.data[static_cast<size_t>(m) * total + off]);
        off += C;
    }
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, xs, M, total]() {
        const Tensor& dY = grads_[out];
        int off = 0;
        for (Var v : xs) {
            const int C = vals_[v].cols();
            for (int m = 0; m < M; ++m)
                for (int c = 0; c < C; ++c)
                    grads_[v].data[static_cast<size_t>(m) * C + c] +=
                        dY.data[static_cast<size_t>(m) * total + off + c];
            off += C;
        }
    };
    return out;
}

Tape::Var Tape::gather_rows(Var x, std::vector<int> idx) {
    const Tensor& X = vals_[x];
    const int C = X.cols(), N = X.rows();
    for (int i : idx)
        if (i < 0 || i >= N) throw std::invalid_argument("gather_rows: index out of range");
    Tensor Y({static_cast<int>(idx.size()), C});
    for (size_t m = 0; m < idx.size(); ++m)
        std::copy_n(&X.data[static_cast<size_t>(idx[m]) * C], C, &Y.data[m * C]);
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, x, idx = std::move(idx), C]() {
        const Tensor& dY = grads_[out];
        Tensor& dX = grads_[x];
        for (size_t m = 0; m < idx.size(); ++m)
            for (int c = 0; c < C; ++c)
                dX.data[static_cast<size_t>(idx[m]) * C + c] += dY.data[m * C + c];
    };
    return out;
}

Tape::Var Tape::reduce_max_groups(Var x, int group) {
    const Tensor& X = vals_[x];
    const int C = X.cols(), R = X.rows();
    if (group < 1 || R % group != 0)
        throw std::invalid_argument("reduce_max_groups: rows not divisible by group size");
    const int G = R / group;
    Tensor Y({G, C});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<size_t>(G) * C);
    for (int g = 0; g < G; ++g)
        for (int c = 0; c < C; ++c) {
            int best = g * group;
            double bv = X(best, c);
            for (int t = 1; t < group; ++t) {
                const double v = X(g * group + t, c);
                if (v > bv) {  // strict: ties route to the first index
                    bv = v;
                    best = g * group + t;
                }
            }
            Y(g, c) = bv;
            (*argmax)[static_cast<size_t>(g) * C + c] = best;
        }
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, x, argmax, C]() {
        const Tensor& dY = grads_[out];
        Tensor& dX = grads_[x];
        for (size_t i = 0; i < dY.data.size(); ++i)
            dX.data[static_cast<size_t>((*argmax)[i]) * C + i % C] += dY.data[i];
    };
    return out;
}

Tape::Var Tape::reduce_sum_groups(Var x, int group) {
    const Tensor& X = vals_[x];
    const int C = X.cols(), R = X.rows();
    if (group < 1 || R % group != 0)
        throw std::invalid_argument("reduce_sum_groups: rows not divisible by group size");
    const int G = R / group;
    Tensor Y({G, C});
    for (int g = 0; g < G; ++g)
        for (int t = 0; t < group; ++t)
            for (int c = 0; c < C; ++c) Y(g, c) += X(g * group + t, c);
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, x, group, C]() {
        const Tensor& dY = grads_[out];
        Tensor& dX = grads_[x];
        const int G = dY.rows();
        for (int g = 0; g < G; ++g)
            for (int t = 0; t < group; ++t)
                for (int c = 0; c < C; ++c)
                    dX.data[static_cast<size_t>(g * group + t) * C + c] += dY(g, c);
    };
    return out;
}

Tape::Var Tape::reduce_mean_groups(Var x, int group) {
    return scale(reduce_sum_groups(x, group), 1.0 / group);
}

Tape::Var Tape::softmax_groups(Var x, int group) {
    const Tensor& X = vals_[x];
    const int R = X.rows();
    if (X.cols() != 1 && X.shape.size() > 1 && X.shape[1] != 1)
        throw std::invalid_argument("softmax_groups: expects a single column");
    if (group < 1 || R % group != 0)
        throw std::invalid_argument("softmax_groups: rows not divisible by group size");
    Tensor Y = X;
    const int G = R / group;
    for (int g = 0; g < G; ++g) {
        double mx = -1e300;
        for (int t = 0; t < group; ++t) mx = std::max(mx, X.data[g * group + t]);
        double sum = 0.0;
        for (int t = 0; t < group; ++t) {
            Y.data[g * group + t] = std::exp(X.data[g * group + t] - mx);
            sum += Y.data[g * group + t];
        }
        for (int t = 0; t < group; ++t) Y.data[g * group + t] /= sum;
    }
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, x, group]() {
        const Tensor& S = vals_[out];
        const Tensor& dY = grads_[out];
        Tensor& dX = grads_[x];
        const int G = S.rows() / group;
        for (int g = 0; g < G; ++g) {
            double dot = 0.0;
            for (int t = 0; t < group; ++t) dot += S.data[g * group + t] * dY.data[g * group + t];
            for (int t = 0; t < group; ++t)
                dX.data[g * group + t] += S.data[g * group + t] * (dY.data[g * group + t] - dot);
        }
    };
    return out;
}

Tape::Var Tape::softmax_cross_entropy(Var logits, const std::vector<int>& labels, bool mean) {
    const Tensor& L = vals_[logits];
    const int M = L.rows(), C = L.cols();
    if (static_cast<int>(labels.size()) != M)
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
    for (int y : labels)
        if (y < 0 || y >= C) throw std::invalid_argument("softmax_cross_entropy: label out of range");
    double total = 0.0;
    for (int m = 0; m < M; ++m) {
        const double* lr = &L.data[static_cast<size_t>(m) * C];
        double mx = lr[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, lr[c]);
        double sum = 0.0;
        for (int c = 0; c < C; ++c) sum += std::exp(lr[c] - mx);
        total += mx + std::log(sum) - lr[labels[m]];
    }
    if (mean) total /= M;
    Var out = emplace(Tensor({1}, {total}));
    nodes_.back().back = [this, out, logits, labels, mean]() {
        const Tensor& L = vals_[logits];
        const int M = L.rows(), C = L.cols();
        const double g = grads_[out].data[0] * (mean ? 1.0 / M : 1.0);
        Tensor& dL = grads_[logits];
        for (int m = 0; m < M; ++m) {
            const double* lr = &L.data[static_cast<size_t>(m) * C];
            double mx = lr[0];
            for (int c = 1; c < C; ++c) mx = std::max(mx, lr[c]);
            double sum = 0.0;
            for (int c = 0; c < C; ++c) sum += std::exp(lr[c] - mx);
            double* dlr = &dL.data[static_cast<size_t>(m) * C];
            for (int c = 0; c < C; ++c) {
                const double p = std::exp(lr[c] - mx) / sum;
                dlr[c] += g * (p - (c == labels[m] ? 1.0 : 0.0));
            }
        }
    };
    return out;
}

Tape::Var Tape::idw_apply(Var coarse, std::vector<int> idx, std::vector<double> w, int kn) {
    const Tensor& X = vals_[coarse];
    const int C = X.cols(), N = X.rows();
    if (idx.size() != w.size() || kn < 1 || idx.size() % kn != 0)
        throw std::invalid_argument("idw_apply: index/weight layout mismatch");
    const int F = static_cast<int>(idx.size()) / kn;
    for (int i : idx)
        if (i < 0 || i >= N) throw std::invalid_argument("idw_apply: index out of range");
    Tensor Y({F, C});
    for (int f = 0; f < F; ++f)
        for (int t = 0; t < kn; ++t) {
            const double wv = w[static_cast<size_t>(f) * kn + t];
            const double* src = &X.data[static_cast<size_t>(idx[static_cast<size_t>(f) * kn + t]) * C];
            double* dst = &Y.data[static_cast<size_t>(f) * C];
            for (int c = 0; c < C; ++c) dst[c] += wv * src[c];
        }
    Var out = emplace(std::move(Y));
    nodes_.back().back = [this, out, coarse, idx = std::move(idx), w = std::move(w), kn, C]() {
        const Tensor& dY = grads_[out];
        Tensor& dX = grads_[coarse];
        const int F = static_cast<int>(idx.size()) / kn;
        for (int f = 0; f < F; ++f)
            for (int t = 0; t < kn; ++t) {
                const double wv = w[static_cast<size_t>(f) * kn + t];
                double* dst = &dX.data[static_cast<size_t>(idx[static_cast<size_t>(f) * kn + t]) * C];
                const double* src = &dY.data[static_cast<size_t>(f) * C];
                for (int c = 0; c < C; ++c) dst[c] += wv * src[c];
            }
    };
    return out;
}

Tape::Var Tape::weighted_sum(const std::vector<Var>& scalars, const std::vector<double>& weights) {
    if (scalars.size() != weights.size() || scalars.empty())
        throw std::invalid_argument("weighted_sum: size mismatch");
    double total = 0.0;
    for (size_t i = 0; i < scalars.size(); ++i) {
        if (vals_[scalars[i]].size() != 1)
            throw std::invalid_argument("weighted_sum: inputs must be scalars");
        total += weights[i] * vals_[scalars[i]].data[0];
    }
    Var out = emplace(Tensor({1}, {total}));
    nodes_.back().back = [this, out, scalars, weights]() {
        const double g = grads_[out].data[0];
        for (size_t i = 0; i < scalars.size(); ++i) grads_[scalars[i]].data[0] += g * weights[i];
    };
    return out;
}

int ParamStore::add(const std::string& name, Tensor init) {
    if (by_name.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
    Entry e;
    e.name = name;
    e.grad = Tensor(init.shape, 0.0);
    e.m = Tensor(init.shape, 0.0);
    e.v = Tensor(init.shape, 0.0);
    e.value = std::move(init);
    entries.push_back(std::move(e));
    by_name[name] = static_cast<int>(entries.size()) - 1;
    return static_cast<int>(entries.size()) - 1;
}

ParamStore::Entry& ParamStore::at(const std::string& name) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::invalid_argument("ParamStore: unknown name " + name);
    return entries[it->second];
}

const ParamStore::Entry& ParamStore::at(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::invalid_argument("ParamStore: unknown name " + name);
    return entries[it->second];
}

void ParamStore::zero_grad() {
    for (auto& e : entries) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

std::vector<Tape::Var> ParamStore::stage(Tape& t) const {
    std::vector<Tape::Var> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(t.input(e.value));
    return ids;
}

void ParamStore::collect(const Tape& t, const std::vector<Tape::Var>& ids) {
    for (size_t i = 0; i < entries.size(); ++i) {
        const Tensor& g = t.grad(ids[i]);
        for (size_t j = 0; j < g.data.size(); ++j) entries[i].grad.data[j] += g.data[j];
    }
}

GradCheckResult grad_check(ParamStore& store,
                           const std::function<Tape::Var(Tape&, const std::vector<Tape::Var>&)>& build,
                           double eps) {
    if (eps < 1e-8 || eps > 1e-4) throw std::invalid_argument("grad_check: eps out of [1e-8, 1e-4]");

    auto eval = [&]() -> double {
        Tape t;
        auto ids = store.stage(t);
        Tape::Var loss = build(t, ids);
        const Tensor& v = t.val(loss);
        if (v.size() != 1) throw std::invalid_argument("grad_check: composite is not scalar");
        if (!std::isfinite(v.data[0])) throw std::runtime_error("grad_check: non-finite loss");
        return v.data[0];
    };

    // analytic gradients
    store.zero_grad();
    {
        Tape t;
        auto ids = store.stage(t);
        Tape::Var loss = build(t, ids);
        t.backward(loss);
        store.collect(t, ids);
    }

    const double f0 = eval();
    GradCheckResult res;
    for (auto& e : store.entries) {
        for (size_t j = 0; j < e.value.data.size(); ++j) {
            const double saved = e.value.data[j];
            auto probe = [&](double h) {
                e.value.data[j] = saved + h;
                const double f = eval();
                e.value.data[j] = saved;
                return f;
            };
            const double fp = probe(eps), fm = probe(-eps);
            const double g1 = (fp - fm) / (2 * eps);
            const double g2 = (probe(2 * eps) - probe(-2 * eps)) / (4 * eps);
            // difference quotients at two scales disagreeing flags a kink/tie
            if (std::fabs(g1 - g2) > 1e-3 * std::max({std::fabs(g1), std::fabs(g2), 1.0})) {
                ++res.skipped;
                continue;
            }
            // a kink sitting on the evaluation point leaves symmetric quotients
            // consistent; forward vs backward quotients expose it
            const double fwd = (fp - f0) / eps, bwd = (f0 - fm) / eps;
            if (std::fabs(fwd - bwd) > 2e-5 * std::max(std::fabs(g1), 1.0)) {
                ++res.skipped;
                continue;
            }
            const double a = e.grad.data[j];
            // the central difference itself carries rounding noise of roughly
            // ulp(f)/eps; gradients below that floor cannot be resolved by it
            const double fd_noise =
                (std::fabs(f0) + std::fabs(fp) + std::fabs(fm)) * 1e-15 / (2 * eps);
            if (std::max(std::fabs(a), std::fabs(g1)) < 3e4 * fd_noise) {
                ++res.skipped;
                continue;
            }
            const double denom = std::max({std::fabs(a), std::fabs(g1), 1e-8});
            res.max_rel_error = std::max(res.max_rel_error, std::fabs(a - g1) / denom);
            ++res.checked;
        }
    }
    return res;
}

}  // namespace dgfa
