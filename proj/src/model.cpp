#include "dgfa/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dgfa {

DgfaMode dgfa_mode_from_string(const std::string& s) {
    if (s == "off") return DgfaMode::Off;
    if (s == "nodense") return DgfaMode::NoDense;
    if (s == "dense") return DgfaMode::Dense;
    throw std::invalid_argument("unknown dgfa mode: " + s);
}

std::string to_string(DgfaMode m) {
    switch (m) {
        case DgfaMode::Off: return "off";
        case DgfaMode::NoDense: return "nodense";
        default: return "dense";
    }
}

void ModelConfig::validate() const {
    if (input_channels < 3) throw std::invalid_argument("ModelConfig: input_channels < 3");
    if (stem_width < 1) throw std::invalid_argument("ModelConfig: stem_width < 1");
    if (encoder_widths.size() != 3)
        throw std::invalid_argument("ModelConfig: expected 3 encoder widths");
    if (decoder_widths.size() != 3)
        throw std::invalid_argument("ModelConfig: expected 3 decoder widths");
    for (int w : encoder_widths)
        if (w < 1) throw std::invalid_argument("ModelConfig: encoder width < 1");
    for (int w : decoder_widths)
        if (w < 1) throw std::invalid_argument("ModelConfig: decoder width < 1");
    if (dgfa_rates.empty()) throw std::invalid_argument("ModelConfig: empty rate list");
    for (size_t i = 1; i < dgfa_rates.size(); ++i)
        if (dgfa_rates[i] <= dgfa_rates[i - 1])
            throw std::invalid_argument("ModelConfig: rates must be strictly increasing");
    if (dgfa_block_width < 1 || dgfa_out_width < 1 || dgfa_k < 1 || dgfa_step < 1)
        throw std::invalid_argument("ModelConfig: dgfa sizes must be >= 1");
    if (class_count < 2) throw std::invalid_argument("ModelConfig: class_count < 2");
    for (int r : dgfa_rates) {
        DilationSpec spec{dgfa_k, dgfa_step, r};
        if (!spec_feasible(spec))
            throw std::invalid_argument("ModelConfig: infeasible (K, step, rate) combination");
    }
}

int ModelConfig::dgfa_block_input(int m) const {
    const int c0 = encoder_widths[2];
    if (m == 1) return c0;
    return dgfa_mode == DgfaMode::Dense ? c0 + (m - 1) * dgfa_block_width : dgfa_block_width;
}

int ModelConfig::dgfa_fuse_input() const {
    return encoder_widths[2] + static_cast<int>(dgfa_rates.size()) * dgfa_block_width;
}

namespace {

void flat_edges(const std::vector<NeighborList>& graph, std::vector<int>& centers,
                std::vector<int>& neigh, int& k) {
    const int n = static_cast<int>(graph.size());
    if (n == 0) throw std::invalid_argument("empty graph");
    k = graph[0].size();
    centers.clear();
    neigh.clear();
    centers.reserve(static_cast<size_t>(n) * k);
    neigh.reserve(static_cast<size_t>(n) * k);
    for (int i = 0; i < n; ++i) {
        if (graph[i].size() != k) throw std::invalid_argument("ragged neighbor lists");
        for (int j : graph[i].neighbors) {
            centers.push_back(i);
            neigh.push_back(j);
        }
    }
}

}  // namespace

Tape::Var dgconv(Tape& t, Tape::Var feats, const std::vector<NeighborList>& graph, Tape::Var w,
                 Tape::Var b) {
    if (t.val(feats).rows() != static_cast<int>(graph.size()))
        throw std::invalid_argument("dgconv: feature rows != graph size");
    std::vector<int> centers, neigh;
    int k = 0;
    flat_edges(graph, centers, neigh, k);
    Tape::Var xi = t.gather_rows(feats, centers);
    Tape::Var xj = t.gather_rows(feats, std::move(neigh));
    Tape::Var edge = t.concat_cols({xi, t.sub(xj, xi)});
    return t.reduce_max_groups(t.linear(edge, w, b), k);
}

Tape::Var encoder_block(Tape& t, Tape::Var feats, const PointSet& fine_points,
                        const std::vector<NeighborList>& level_graph,
                        const std::vector<NeighborList>& mapping, Tape::Var att_w, Tape::Var att_b,
                        Tape::Var w, Tape::Var b) {
    if (t.val(feats).rows() != static_cast<int>(level_graph.size()) ||
        t.val(feats).rows() != fine_points.n())
        throw std::invalid_argument("encoder_block: feature rows != fine level size");
    std::vector<int> centers, neigh;
    int k = 0;
    flat_edges(level_graph, centers, neigh, k);

    Tensor dp({static_cast<int>(centers.size()), 3});
    for (size_t e = 0; e < centers.size(); ++e) {
        const double* pi = fine_points.point(centers[e]);
        const double* pj = fine_points.point(neigh[e]);
        for (int a = 0; a < 3; ++a) dp.data[e * 3 + a] = pj[a] - pi[a];
    }
    Tape::Var dp_var = t.input(std::move(dp));

    Tape::Var xi = t.gather_rows(feats, centers);
    Tape::Var xj = t.gather_rows(feats, std::move(neigh));
    Tape::Var score = t.linear(t.concat_cols({dp_var, t.sub(xj, xi)}), att_w, att_b);
    Tape::Var alpha = t.softmax_groups(score, k);
    // sum_j alpha (W x_j + b) = sum_j alpha W x_j + b since alpha sums to 1
    Tape::Var h = t.scale_rows(t.linear(xj, w, b), alpha);
    Tape::Var fine_out = t.relu(t.reduce_sum_groups(h, k));

    std::vector<int> map_centers, map_neigh;
    int mk = 0;
    flat_edges(mapping, map_centers, map_neigh, mk);
    return t.reduce_max_groups(t.gather_rows(fine_out, std::move(map_neigh)), mk);
}

Tape::Var propagate(Tape& t, Tape::Var coarse_feats, const PointSet& coarse,
                    const PointSet& fine) {
    if (coarse.n() < 1) throw std::invalid_argument("propagate: empty coarse level");
    if (t.val(coarse_feats).rows() != coarse.n())
        throw std::invalid_argument("propagate: feature rows != coarse size");
    const int kn = std::min(3, coarse.n());
    SpatialIndex index(coarse);
    std::vector<int> idx(static_cast<size_t>(fine.n()) * kn);
    std::vector<double> w(static_cast<size_t>(fine.n()) * kn, 0.0);
    for (int f = 0; f < fine.n(); ++f) {
        NeighborList nn = index.knn_at(fine.point(f), kn, -1, f);
        bool exact = false;
        for (int tt = 0; tt < kn; ++tt) {
            idx[static_cast<size_t>(f) * kn + tt] = nn.neighbors[tt];
            if (!exact && nn.distances[tt] < 1e-12) {
                w[static_cast<size_t>(f) * kn + tt] = 1.0;
                exact = true;
            }
        }
        if (!exact) {
            double sum = 0.0;
            for (int tt = 0; tt < kn; ++tt) {
                const double d = nn.distances[tt];
                w[static_cast<size_t>(f) * kn + tt] = 1.0 / (d * d);
                sum += w[static_cast<size_t>(f) * kn + tt];
            }
            for (int tt = 0; tt < kn; ++tt) w[static_cast<size_t>(f) * kn + tt] /= sum;
        }
    }
    return t.idw_apply(coarse_feats, std::move(idx), std::move(w), kn);
}

Tape::Var dgfa(Tape& t, Tape::Var feats, const DilatedGraphSet& graphs,
               const std::vector<DgfaBlockParams>& blocks, Tape::Var fuse_w, Tape::Var fuse_b,
               bool dense) {
    if (blocks.size() != graphs.rates.size())
        throw std::invalid_argument("dgfa: one block per rate required");
    std::vector<Tape::Var> outs;  // F_0 .. F_M
    outs.push_back(feats);
    for (size_t m = 0; m < blocks.size(); ++m) {
        Tape::Var in = dense ? (outs.size() == 1 ? outs[0] : t.concat_cols(outs)) : outs.back();
        outs.push_back(dgconv(t, in, graphs.graphs[m], blocks[m].w, blocks[m].b));
    }
    return t.relu(t.linear(t.concat_cols(outs), fuse_w, fuse_b));
}

Tape::Var maloss(Tape& t, const PyramidVars& out, const LabelPyramid& labels,
                 const std::vector<double>& lambdas, bool mean_reduction) {
    if (out.logits.size() != labels.levels.size() || out.logits.size() != lambdas.size())
        throw std::invalid_argument("maloss: level count mismatch");
    std::vector<Tape::Var> terms;
    for (size_t l = 0; l < out.logits.size(); ++l)
        terms.push_back(t.softmax_cross_entropy(out.logits[l], labels.levels[l], mean_reduction));
    return t.weighted_sum(terms, lambdas);
}

std::vector<int> argmax_rows(const Tensor& logits) {
    std::vector<int> out(logits.rows());
    const int C = logits.cols();
    for (int m = 0; m < logits.rows(); ++m) {
        int best = 0;
        for (int c = 1; c < C; ++c)
            if (logits(m, c) > logits(m, best)) best = c;
        out[m] = best;
    }
    return out;
}

Tensor make_features(const PointSet& points, const std::vector<double>& extra_channels,
                     int input_channels) {
    const int n = points.n();
    const int extra = input_channels - 3;
    if (extra < 0) throw std::invalid_argument("make_features: input_channels < 3");
    if (extra > 0 && static_cast<int>(extra_channels.size()) != n * extra)
        throw std::invalid_argument("make_features: extra channel size mismatch");
    Tensor f({n, input_channels});
    for (int i = 0; i < n; ++i) {
        const double* p = points.point(i);
        for (int a = 0; a < 3; ++a) f(i, a) = p[a];
        for (int a = 0; a < extra; ++a) f(i, 3 + a) = extra_channels[static_cast<size_t>(i) * extra + a];
    }
    return f;
}

DgfaNet::DgfaNet(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::mt19937_64 rng(seed);
    auto init = [&](const std::string& name, int fan_in, int fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-a, a);
        Tensor w({fan_in, fan_out});
        for (double& v : w.data) v = dist(rng);
        params_.add(name + ".W", std::move(w));
        params_.add(name + ".b", Tensor({fan_out}, 0.0));
    };

    init("stem", cfg_.input_channels, cfg_.stem_width);
    int prev = cfg_.stem_width;
    for (int l = 1; l <= 3; ++l) {
        const int out = cfg_.encoder_widths[l - 1];
        init("enc" + std::to_string(l) + ".att", 3 + prev, 1);
        init("enc" + std::to_string(l), prev, out);
        prev = out;
    }
    if (cfg_.dgfa_mode == DgfaMode::Off) {
        init("dgfa.mlp", cfg_.encoder_widths[2], cfg_.dgfa_out_width);
    } else {
        const int rates = static_cast<int>(cfg_.dgfa_rates.size());
        // edge features are concat(x_i, x_j - x_i), twice the block input width
        for (int m = 1; m <= rates; ++m)
            init("dgfa.block" + std::to_string(m), 2 * cfg_.dgfa_block_input(m),
                 cfg_.dgfa_block_width);
        init("dgfa.fuse", cfg_.dgfa_fuse_input(), cfg_.dgfa_out_width);
    }
    // decoder chain i = 2, 1, 0
    const int skip_w[3] = {cfg_.stem_width, cfg_.encoder_widths[0], cfg_.encoder_widths[1]};
    int above = cfg_.dgfa_out_width;
    for (int i = 2; i >= 0; --i) {
        const int out = cfg_.decoder_widths[2 - i];
        init("dec" + std::to_string(i), skip_w[i] + above, out);
        above = out;
    }
    init("head3", cfg_.dgfa_out_width, cfg_.class_count);
    for (int i = 2; i >= 0; --i)
        init("head" + std::to_string(i), cfg_.decoder_widths[2 - i], cfg_.class_count);
}

Tape::Var DgfaNet::p(const std::vector<Tape::Var>& ids, const std::string& name) const {
    return ids[params_.by_name.at(name)];
}

DgfaNet::Activations DgfaNet::run(Tape& t, const std::vector<Tape::Var>& param_ids,
                                  const Tensor& features, const Hierarchy& h,
                                  const DilatedGraphSet& graphs) const {
    if (h.level_count() != 4)
        throw std::invalid_argument("DgfaNet: expected a 4-level hierarchy");
    if (features.rows() != h.level_size(0) || features.cols() != cfg_.input_channels)
        throw std::invalid_argument("DgfaNet: feature shape mismatch");
    if (static_cast<int>(graphs.graphs.size()) != static_cast<int>(cfg_.dgfa_rates.size()) &&
        cfg_.dgfa_mode != DgfaMode::Off)
        throw std::invalid_argument("DgfaNet: dilated graph set does not cover the rate list");

    Activations act;
    act.skip.resize(4);
    act.fused.resize(4);

    Tape::Var x = t.input(features);
    act.skip[0] = t.relu(t.linear(x, p(param_ids, "stem.W"), p(param_ids, "stem.b")));
    for (int l = 1; l <= 3; ++l) {
        const std::string e = "enc" + std::to_string(l);
        act.skip[l] = encoder_block(t, act.skip[l - 1], h.level_points[l - 1], h.sub_graphs[l - 1],
                                    h.mapping_graphs[l - 1], p(param_ids, e + ".att.W"),
                                    p(param_ids, e + ".att.b"), p(param_ids, e + ".W"),
                                    p(param_ids, e + ".b"));
    }

    if (cfg_.dgfa_mode == DgfaMode::Off) {
        act.fused[3] = t.relu(
            t.linear(act.skip[3], p(param_ids, "dgfa.mlp.W"), p(param_ids, "dgfa.mlp.b")));
    } else {
        std::vector<DgfaBlockParams> blocks;
        for (size_t m = 1; m <= cfg_.dgfa_rates.size(); ++m)
            blocks.push_back({p(param_ids, "dgfa.block" + std::to_string(m) + ".W"),
                              p(param_ids, "dgfa.block" + std::to_string(m) + ".b")});
        act.fused[3] = dgfa(t, act.skip[3], graphs, blocks, p(param_ids, "dgfa.fuse.W"),
                            p(param_ids, "dgfa.fuse.b"), cfg_.dgfa_mode == DgfaMode::Dense);
    }

    for (int i = 2; i >= 0; --i) {
        Tape::Var up = propagate(t, act.fused[i + 1], h.level_points[i + 1], h.level_points[i]);
        const std::string d = "dec" + std::to_string(i);
        act.fused[i] = t.relu(t.linear(t.concat_cols({act.skip[i], up}), p(param_ids, d + ".W"),
                                       p(param_ids, d + ".b")));
    }

    act.logits.logits.resize(4);
    for (int i = 0; i <= 3; ++i) {
        const std::string hd = "head" + std::to_string(i);
        act.logits.logits[i] =
            t.linear(act.fused[i], p(param_ids, hd + ".W"), p(param_ids, hd + ".b"));
    }
    return act;
}

PyramidVars DgfaNet::forward(Tape& t, const std::vector<Tape::Var>& param_ids,
                             const Tensor& features, const Hierarchy& h,
                             const DilatedGraphSet& graphs) const {
    return run(t, param_ids, features, h, graphs).logits;
}

Tape::Var DgfaNet::last_upsample(Tape& t, const std::vector<Tape::Var>& param_ids,
                                 const Tensor& features, const Hierarchy& h,
                                 const DilatedGraphSet& graphs) const {
    return run(t, param_ids, features, h, graphs).fused[0];
}

std::vector<int> DgfaNet::predict(const Tensor& features, const Hierarchy& h,
                                  const DilatedGraphSet& graphs) const {
    Tape t;
    auto ids = params_.stage(t);
    PyramidVars out = forward(t, ids, features, h, graphs);
    return argmax_rows(t.val(out.logits[0]));
}

}  // namespace dgfa
