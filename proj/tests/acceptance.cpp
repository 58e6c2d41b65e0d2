// Acceptance gate: one check per numbered criterion, each printing a single
// PASS/FAIL line. Run with no arguments for all checks or with a list of
// criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dgfa/io.hpp"
#include "dgfa/train.hpp"
#include "oracles.hpp"

using namespace dgfa;

namespace {

struct Check {
    int id;
    const char* title;
    bool (*fn)(std::string& detail);
};

// ---------------------------------------------------------------- 1

bool check_expansion_table(std::string& detail) {
    const struct {
        int k, step, rate, want;
    } table[] = {
        {8, 2, 1, 8},  {8, 2, 2, 12}, {8, 2, 3, 16}, {7, 2, 2, 11}, {8, 4, 1, 8},
        {8, 4, 2, 14}, {8, 4, 4, 26}, {8, 4, 8, 50}, {4, 2, 2, 6},  {16, 4, 2, 28},
        {16, 4, 4, 52}, {1, 1, 1, 1}, {12, 3, 2, 20}, {6, 2, 4, 15},
    };
    for (const auto& row : table) {
        const int got = expansion_count({row.k, row.step, row.rate});
        if (got != row.want) {
            detail = "(" + std::to_string(row.k) + "," + std::to_string(row.step) + "," +
                     std::to_string(row.rate) + ") gave " + std::to_string(got) + ", wanted " +
                     std::to_string(row.want);
            return false;
        }
    }
    detail = "14 hand-derived expansion counts exact";
    return true;
}

// ---------------------------------------------------------------- 2

bool check_sparse_oracle(std::string& detail) {
    std::mt19937_64 rng(1001);
    long long compared = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 16 + static_cast<int>(rng() % 241);  // <= 256
        PointSet ps = oracle::random_cloud(n, rng);
        DilationSpec spec{1 + static_cast<int>(rng() % 12), 1 + static_cast<int>(rng() % 5),
                          1 + static_cast<int>(rng() % 6)};
        if (!spec_feasible(spec) || expansion_count(spec) > n - 1) {
            spec = DilationSpec{4, 2, 1};  // always valid fallback for small clouds
            if (expansion_count(spec) > n - 1) continue;
        }
        SpatialIndex idx(ps);
        for (int q = 0; q < 4; ++q) {
            const int center = static_cast<int>(rng() % n);
            NeighborList got = sparse_knn(idx, center, spec);
            if (got.neighbors !=
                oracle::sparse_neighbors(ps, center, spec.k_target, spec.step, spec.rate)) {
                detail = "mismatch on trial " + std::to_string(trial);
                return false;
            }
            ++compared;
        }
    }
    detail = std::to_string(compared) + " query/oracle comparisons exact";
    return true;
}

// ---------------------------------------------------------------- 3

bool check_rate1_reduction(std::string& detail) {
    std::mt19937_64 rng(1002);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 8 + static_cast<int>(rng() % 120);
        PointSet ps = oracle::random_cloud(n, rng);
        const int k = 1 + static_cast<int>(rng() % std::min(12, n - 1));
        const int step = 1 + static_cast<int>(rng() % 5);
        SpatialIndex idx(ps);
        const int center = static_cast<int>(rng() % n);
        NeighborList a = sparse_knn(idx, center, {k, step, 1});
        NeighborList b = idx.knn(center, k);
        if (a.neighbors != b.neighbors || a.ranks != b.ranks) {
            detail = "mismatch on trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "1000 fuzzed rate-1 searches equal plain top-k";
    return true;
}

// ---------------------------------------------------------------- 4

bool check_cardinality(std::string& detail) {
    std::mt19937_64 rng(1003);
    int done = 0;
    while (done < 1000) {
        DilationSpec spec{1 + static_cast<int>(rng() % 16), 1 + static_cast<int>(rng() % 6),
                          1 + static_cast<int>(rng() % 8)};
        if (!spec_feasible(spec)) continue;
        const int n = expansion_count(spec) + 1 + static_cast<int>(rng() % 32);
        PointSet ps = oracle::random_cloud(n, rng);
        SpatialIndex idx(ps);
        NeighborList nl = sparse_knn(idx, static_cast<int>(rng() % n), spec);
        if (nl.size() != spec.k_target) {
            detail = "got " + std::to_string(nl.size()) + " neighbors, wanted " +
                     std::to_string(spec.k_target);
            return false;
        }
        ++done;
    }
    detail = "1000 fuzzed valid specs all returned exactly k neighbors";
    return true;
}

// ---------------------------------------------------------------- 5

bool check_fps_maxmin(std::string& detail) {
    std::mt19937_64 rng(1004);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 61);  // <= 64
        PointSet ps = oracle::random_cloud(n, rng);
        const int m = 2 + static_cast<int>(rng() % (n - 1));
        const int start = static_cast<int>(rng() % n);
        std::vector<int> sel = farthest_point_sample(ps, m, start);
        if (sel[0] != start) {
            detail = "selection does not begin at the start index";
            return false;
        }
        for (int s = 1; s < m; ++s) {
            auto min_d2 = [&](int i) {
                double best = 1e300;
                for (int t = 0; t < s; ++t)
                    best = std::min(best, squared_distance(ps.point(i), ps.point(sel[t])));
                return best;
            };
            const double chosen = min_d2(sel[s]);
            for (int i = 0; i < n; ++i) {
                bool used = false;
                for (int t = 0; t <= s; ++t) used |= sel[t] == i;
                if (used) continue;
                if (min_d2(i) > chosen) {
                    detail = "non-maximal pick at step " + std::to_string(s) + " of trial " +
                             std::to_string(trial);
                    return false;
                }
            }
        }
    }
    detail = "100 clouds, every greedy step maximal";
    return true;
}

// ---------------------------------------------------------------- 6

Tensor rnd(std::vector<int> shape, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Tensor t(std::move(shape));
    for (double& v : t.data) v = uni(rng);
    return t;
}

Tape::Var collapse(Tape& t, Tape::Var x) {
    // copy shape info up front: adding nodes may reallocate tape storage
    const std::vector<int> shape = t.val(x).shape;
    const int rows = t.val(x).rows();
    Tensor coef(shape);
    for (int i = 0; i < coef.size(); ++i) coef.data[i] = 0.4 + 0.03 * i;
    auto col = t.reduce_sum_groups(t.mul(x, t.input(std::move(coef))), rows);
    const int cols = t.val(col).cols();
    return t.linear(col, t.input(Tensor({cols, 1}, 1.0)), t.input(Tensor({1}, 0.0)));
}

bool check_gradients(std::string& detail) {
    std::mt19937_64 rng(1005);
    double worst_primitive = 0.0;
    auto prim = [&](auto build, std::vector<Tensor> params) {
        ParamStore store;
        for (size_t i = 0; i < params.size(); ++i)
            store.add("p" + std::to_string(i), std::move(params[i]));
        GradCheckResult r = grad_check(store, build, 1e-6);
        worst_primitive = std::max(worst_primitive, r.max_rel_error);
        return r.checked > 0;
    };
    using Ids = std::vector<Tape::Var>;
    bool ok = true;
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.linear(v[0], v[1], v[2])); },
               {rnd({5, 3}, rng), rnd({3, 4}, rng), rnd({4}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.relu(v[0])); },
               {rnd({6, 3}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.add(v[0], v[1])); },
               {rnd({4, 3}, rng), rnd({4, 3}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.sub(v[0], v[1])); },
               {rnd({4, 3}, rng), rnd({4, 3}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.mul(v[0], v[1])); },
               {rnd({4, 3}, rng), rnd({4, 3}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.scale(v[0], 2.5)); },
               {rnd({4, 3}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.scale_rows(v[0], v[1])); },
               {rnd({4, 3}, rng), rnd({4}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.concat_cols({v[0], v[1]})); },
               {rnd({4, 2}, rng), rnd({4, 3}, rng)});
    ok &= prim(
        [&](Tape& t, const Ids& v) { return collapse(t, t.gather_rows(v[0], {1, 0, 2, 1, 1})); },
        {rnd({3, 3}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.reduce_max_groups(v[0], 3)); },
               {rnd({9, 2}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.reduce_sum_groups(v[0], 3)); },
               {rnd({9, 2}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.reduce_mean_groups(v[0], 3)); },
               {rnd({9, 2}, rng)});
    ok &= prim([&](Tape& t, const Ids& v) { return collapse(t, t.softmax_groups(v[0], 4)); },
               {rnd({8, 1}, rng)});
    ok &= prim(
        [&](Tape& t, const Ids& v) { return t.softmax_cross_entropy(v[0], {0, 2, 1}, true); },
        {rnd({3, 3}, rng)});
    ok &= prim(
        [&](Tape& t, const Ids& v) {
            return collapse(t, t.idw_apply(v[0], {0, 1, 1, 2, 2, 0}, {0.3, 0.7, 0.5, 0.5, 0.9, 0.1}, 2));
        },
        {rnd({3, 3}, rng)});
    ok &= prim(
        [&](Tape& t, const Ids& v) {
            auto a = t.softmax_cross_entropy(v[0], {0, 1}, false);
            auto b = t.softmax_cross_entropy(v[0], {1, 0}, true);
            return t.weighted_sum({a, b}, {0.4, 1.6});
        },
        {rnd({2, 2}, rng)});
    if (!ok || worst_primitive > 1e-6) {
        detail = "primitive max relative error " + std::to_string(worst_primitive);
        return false;
    }

    // full toy network, 64 points, 3 classes, widths <= 32
    PointSet ps = oracle::random_cloud(64, rng);
    Hierarchy h = build_hierarchy(ps, {2, 2, 2}, 2, 0);
    ModelConfig cfg;
    cfg.stem_width = 6;
    cfg.encoder_widths = {6, 8, 8};
    cfg.dgfa_rates = {1, 2};
    cfg.dgfa_block_width = 4;
    cfg.dgfa_out_width = 8;
    cfg.dgfa_k = 2;
    cfg.dgfa_step = 2;
    cfg.decoder_widths = {8, 6, 6};
    cfg.class_count = 3;
    DilatedGraphSet graphs = build_dilated_graphs(
        h.level_points[3], DilationSpec{cfg.dgfa_k, cfg.dgfa_step, 1}, cfg.dgfa_rates);
    DgfaNet net(cfg, 77);
    std::vector<int> labels(64);
    for (int i = 0; i < 64; ++i) labels[i] = i % 3;
    LabelPyramid pyramid = label_pyramid(labels, 3, h);
    Tensor feats = make_features(ps, {}, 3);
    GradCheckResult full = grad_check(
        net.params(),
        [&](Tape& t, const std::vector<Tape::Var>& ids) {
            return maloss(t, net.forward(t, ids, feats, h, graphs), pyramid,
                          {1.0, 1.0, 1.0, 1.0}, true);
        },
        1e-6);
    if (full.max_rel_error > 1e-5) {
        detail = "full model max relative error " + std::to_string(full.max_rel_error);
        return false;
    }
    std::ostringstream os;
    os << "primitives worst " << worst_primitive << ", full model worst " << full.max_rel_error
       << " over " << full.checked << " params (" << full.skipped << " kinks skipped)";
    detail = os.str();
    return true;
}

// ---------------------------------------------------------------- 7

bool check_maloss_analytic(std::string& detail) {
    {
        // confident correct logits: loss vanishes
        Tape t;
        PyramidVars out;
        Tensor logits({2, 3}, 0.0);
        logits(0, 1) = 100.0;
        logits(1, 0) = 100.0;
        out.logits = {t.input(logits)};
        LabelPyramid lab;
        lab.levels = {{1, 0}};
        auto loss = maloss(t, out, lab, {1.0}, true);
        if (std::fabs(t.val(loss).data[0]) > 1e-12) {
            detail = "confident correct logits did not vanish";
            return false;
        }
    }
    {
        // uniform logits, 4 classes, only the finest level weighted
        Tape t;
        PyramidVars out;
        out.logits = {t.input(Tensor({3, 4}, 0.25)), t.input(Tensor({1, 4}, 9.0))};
        LabelPyramid lab;
        lab.levels = {{0, 1, 2}, {3}};
        auto loss = maloss(t, out, lab, {1.0, 0.0}, true);
        if (std::fabs(t.val(loss).data[0] - std::log(4.0)) > 1e-9) {
            detail = "uniform-logit case missed ln 4";
            return false;
        }
    }
    {
        // two weighted levels, hand-computed
        Tape t;
        PyramidVars out;
        out.logits = {t.input(Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0})),
                      t.input(Tensor({1, 2}, {2.0, 0.0}))};
        LabelPyramid lab;
        lab.levels = {{0, 0}, {1}};
        const double l0 = 0.5 * (std::log(1.0 + std::exp(-1.0)) + std::log(1.0 + std::exp(1.0)));
        const double l1 = std::log(1.0 + std::exp(2.0));
        auto loss = maloss(t, out, lab, {1.0, 1.5}, true);
        if (std::fabs(t.val(loss).data[0] - (l0 + 1.5 * l1)) > 1e-9) {
            detail = "weighted two-level case off";
            return false;
        }
    }
    detail = "vanishing, uniform and weighted cases all within tolerance";
    return true;
}

// ---------------------------------------------------------------- 8

bool check_metrics_oracle(std::string& detail) {
    {
        Metrics m = evaluate({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
        if (std::fabs(m.overall_accuracy - 0.75) > 1e-12 ||
            std::fabs(m.mean_iou - (0.5 + 2.0 / 3.0) / 2.0) > 1e-12) {
            detail = "hand case off";
            return false;
        }
    }
    std::mt19937_64 rng(1006);
    for (int trial = 0; trial < 1000; ++trial) {
        const int C = 2 + static_cast<int>(rng() % 5);
        const int n = 1 + static_cast<int>(rng() % 200);
        std::vector<int> gt(n), pred(n);
        for (int i = 0; i < n; ++i) {
            gt[i] = static_cast<int>(rng() % C);
            pred[i] = static_cast<int>(rng() % C);
        }
        Metrics m = evaluate(pred, gt, C);
        // independent recomputation
        std::vector<std::vector<long long>> cm(C, std::vector<long long>(C, 0));
        for (int i = 0; i < n; ++i) ++cm[gt[i]][pred[i]];
        long long trace = 0;
        double iou_sum = 0, acc_sum = 0;
        int iou_n = 0, acc_n = 0;
        for (int c = 0; c < C; ++c) {
            long long tp = cm[c][c], row = 0, col = 0;
            for (int j = 0; j < C; ++j) {
                row += cm[c][j];
                col += cm[j][c];
            }
            trace += tp;
            if (row + col - tp > 0) {
                iou_sum += static_cast<double>(tp) / static_cast<double>(row + col - tp);
                ++iou_n;
            }
            if (row > 0) {
                acc_sum += static_cast<double>(tp) / static_cast<double>(row);
                ++acc_n;
            }
        }
        const double oa = static_cast<double>(trace) / n;
        const double miou = iou_n ? iou_sum / iou_n : 0.0;
        const double macc = acc_n ? acc_sum / acc_n : 0.0;
        if (std::fabs(m.overall_accuracy - oa) > 1e-12 || std::fabs(m.mean_iou - miou) > 1e-12 ||
            std::fabs(m.mean_class_accuracy - macc) > 1e-12) {
            detail = "oracle mismatch on trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "1000 random confusion matrices match the reimplementation";
    return true;
}

// ---------------------------------------------------------------- 9

Tensor oracle_conv(const Tensor& X, const std::vector<NeighborList>& g, const Tensor& W,
                   const Tensor& B) {
    const int C = X.cols(), Co = W.cols();
    Tensor Y({static_cast<int>(g.size()), Co});
    for (size_t i = 0; i < g.size(); ++i)
        for (int co = 0; co < Co; ++co) {
            double best = -1e300;
            for (int j : g[i].neighbors) {
                double acc = B.data[co];
                for (int k = 0; k < C; ++k) acc += X(static_cast<int>(i), k) * W(k, co);
                for (int k = 0; k < C; ++k)
                    acc += (X(j, k) - X(static_cast<int>(i), k)) * W(C + k, co);
                best = std::max(best, acc);
            }
            Y(static_cast<int>(i), co) = best;
        }
    return Y;
}

bool check_dgfa_structure(std::string& detail) {
    // channel bookkeeping across rate set sizes
    for (const auto& rates :
         std::vector<std::vector<int>>{{1}, {1, 2}, {1, 2, 4, 8}}) {
        ModelConfig cfg;
        cfg.dgfa_rates = rates;
        const int M = static_cast<int>(rates.size());
        for (int m = 1; m <= M; ++m) {
            const int want = m == 1 ? cfg.encoder_widths[2]
                                    : cfg.encoder_widths[2] + (m - 1) * cfg.dgfa_block_width;
            if (cfg.dgfa_block_input(m) != want) {
                detail = "dense block input width wrong for m=" + std::to_string(m);
                return false;
            }
        }
        if (cfg.dgfa_fuse_input() != cfg.encoder_widths[2] + M * cfg.dgfa_block_width) {
            detail = "fusion input width wrong for " + std::to_string(M) + " rates";
            return false;
        }
        DgfaNet net(cfg, 5);
        for (int m = 1; m <= M; ++m) {
            const auto& W = net.params().at("dgfa.block" + std::to_string(m) + ".W").value;
            if (W.shape != std::vector<int>{2 * cfg.dgfa_block_input(m), cfg.dgfa_block_width}) {
                detail = "materialized block weight shape wrong for m=" + std::to_string(m);
                return false;
            }
        }
    }

    std::mt19937_64 rng(1007);
    PointSet ps = oracle::random_cloud(30, rng);
    {
        // single rate: dense flag has no effect, bitwise
        DilatedGraphSet graphs = build_dilated_graphs(ps, {3, 2, 1}, {2});
        Tensor X = rnd({30, 5}, rng), Wb = rnd({10, 4}, rng), Bb = rnd({4}, rng);
        Tensor Wf = rnd({9, 6}, rng), Bf = rnd({6}, rng);
        auto run = [&](bool dense) {
            Tape t;
            std::vector<DgfaBlockParams> blocks{{t.input(Wb), t.input(Bb)}};
            return t.val(dgfa::dgfa(t, t.input(X), graphs, blocks, t.input(Wf), t.input(Bf), dense))
                .data;
        };
        if (run(true) != run(false)) {
            detail = "single-rate dense/nodense outputs differ";
            return false;
        }
    }
    {
        // two rates vs straight-line oracle
        DilatedGraphSet graphs = build_dilated_graphs(ps, {3, 2, 1}, {1, 2});
        const int C0 = 4, BW = 3, OUT = 5;
        Tensor X = rnd({30, C0}, rng);
        Tensor W1 = rnd({2 * C0, BW}, rng), B1 = rnd({BW}, rng);
        Tensor W2 = rnd({2 * (C0 + BW), BW}, rng), B2 = rnd({BW}, rng);
        Tensor Wf = rnd({C0 + 2 * BW, OUT}, rng), Bf = rnd({OUT}, rng);
        Tensor F1 = oracle_conv(X, graphs.graphs[0], W1, B1);
        Tensor cat({30, C0 + BW});
        for (int i = 0; i < 30; ++i) {
            for (int c = 0; c < C0; ++c) cat(i, c) = X(i, c);
            for (int c = 0; c < BW; ++c) cat(i, C0 + c) = F1(i, c);
        }
        Tensor F2 = oracle_conv(cat, graphs.graphs[1], W2, B2);
        Tape t;
        std::vector<DgfaBlockParams> blocks{{t.input(W1), t.input(B1)},
                                            {t.input(W2), t.input(B2)}};
        auto y = dgfa::dgfa(t, t.input(X), graphs, blocks, t.input(Wf), t.input(Bf), true);
        for (int i = 0; i < 30; ++i)
            for (int o = 0; o < OUT; ++o) {
                double acc = Bf.data[o];
                for (int c = 0; c < C0; ++c) acc += X(i, c) * Wf(c, o);
                for (int c = 0; c < BW; ++c) acc += F1(i, c) * Wf(C0 + c, o);
                for (int c = 0; c < BW; ++c) acc += F2(i, c) * Wf(C0 + BW + c, o);
                if (std::fabs(t.val(y)(i, o) - std::max(0.0, acc)) > 1e-12) {
                    detail = "aggregation output differs from the straight-line oracle";
                    return false;
                }
            }
    }
    detail = "widths, single-rate equivalence and two-rate oracle all hold";
    return true;
}

// ---------------------------------------------------------------- 10

bool check_ablation(std::string& detail) {
    SceneSpec spec;  // defaults: 4096-point rooms with boards on walls
    auto clouds = gen_scenes(spec, 32, 20240601);
    std::vector<LabeledCloud> train_clouds(clouds.begin(), clouds.begin() + 24);
    std::vector<LabeledCloud> eval_clouds(clouds.begin() + 24, clouds.end());

    TrainConfig base;
    base.epochs = 12;
    base.lr = 2e-3;
    base.ratios = {4, 4, 2};
    base.graph_k = 16;
    base.lambdas = {1.0, 1.0, 1.0, 1.0};
    base.model.stem_width = 8;
    base.model.encoder_widths = {12, 16, 16};
    base.model.dgfa_rates = {1, 2, 4, 8};
    base.model.dgfa_block_width = 8;
    base.model.dgfa_out_width = 16;
    base.model.dgfa_k = 8;
    base.model.dgfa_step = 4;
    base.model.decoder_widths = {16, 12, 8};
    base.model.class_count = kSceneClassCount;

    auto arm = [&](const std::string& name, bool multi_loss, DgfaMode mode,
                   std::vector<int> rates) {
        AblationArm a{name, base};
        if (!multi_loss) {
            a.cfg.lambdas.assign(4, 0.0);
            a.cfg.lambdas[0] = 1.0;
        }
        a.cfg.model.dgfa_mode = mode;
        a.cfg.model.dgfa_rates = std::move(rates);
        return a;
    };
    // arms differ in exactly one component each relative to the full model
    std::vector<AblationArm> arms{
        arm("no-pyramid-loss", false, DgfaMode::NoDense, {1, 2, 4, 8}),
        arm("pyramid-loss+chain", true, DgfaMode::NoDense, {1, 2, 4, 8}),
        arm("pyramid-loss+dense", true, DgfaMode::Dense, {1, 2, 4, 8}),
        arm("single-rate", true, DgfaMode::Dense, {1}),
    };
    const std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    AblationResult res = ablation_run(arms, seeds, train_clouds, eval_clouds, true);

    auto summary = [&](const std::string& name) -> const AblationArmSummary& {
        for (const auto& s : res.summary)
            if (s.arm == name) return s;
        throw std::runtime_error("missing arm " + name);
    };
    const auto& plain = summary("no-pyramid-loss");
    const auto& chain = summary("pyramid-loss+chain");
    const auto& dense = summary("pyramid-loss+dense");
    const auto& single = summary("single-rate");

    const int board = 3;
    const double board_gain = dense.median_class_iou[board] - single.median_class_iou[board];
    std::ostringstream os;
    os << "board IoU multi-rate " << dense.median_class_iou[board] << " vs single-rate "
       << single.median_class_iou[board] << " (gain " << board_gain << "); median mIoU dense "
       << dense.median_miou << " >= chained " << chain.median_miou << " >= plain "
       << plain.median_miou;
    detail = os.str();
    if (board_gain < 0.05) return false;
    if (!(dense.median_miou >= chain.median_miou && chain.median_miou >= plain.median_miou))
        return false;
    return true;
}

// ---------------------------------------------------------------- 11

bool check_dgg1_roundtrip(std::string& detail) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dgfa_acceptance";
    fs::create_directories(dir);
    std::mt19937_64 rng(1008);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 48 + static_cast<int>(rng() % 160);
        PointSet ps = oracle::random_cloud(n, rng, 2.0);
        GraphBundle b;
        b.hierarchy = build_hierarchy(ps, {2, 2, 2}, 2, static_cast<int>(rng() % n));
        b.graphs = build_dilated_graphs(b.hierarchy.level_points.back(), {2, 2, 1}, {1, 2});
        if (rng() % 2) {
            std::vector<int> labels(n);
            for (int& l : labels) l = static_cast<int>(rng() % 5);
            b.class_count = 5;
            b.labels = label_pyramid(labels, 5, b.hierarchy);
        }
        const std::string path = (dir / ("rt_" + std::to_string(trial) + ".dgg1")).string();
        write_dgg1(path, b);
        GraphBundle r = read_dgg1(path);

        const Hierarchy &ha = b.hierarchy, &hb = r.hierarchy;
        bool same = hb.level_count() == ha.level_count() && hb.k == ha.k &&
                    hb.ratios == ha.ratios && hb.start == ha.start &&
                    hb.fps_indices == ha.fps_indices && hb.level_indices == ha.level_indices;
        for (int l = 0; same && l < ha.level_count(); ++l) {
            same &= hb.level_points[l].coords == ha.level_points[l].coords;
            for (size_t i = 0; same && i < ha.sub_graphs[l].size(); ++i)
                same &= hb.sub_graphs[l][i].neighbors == ha.sub_graphs[l][i].neighbors &&
                        hb.sub_graphs[l][i].distances == ha.sub_graphs[l][i].distances &&
                        hb.sub_graphs[l][i].ranks == ha.sub_graphs[l][i].ranks;
        }
        for (size_t l = 0; same && l < ha.mapping_graphs.size(); ++l)
            for (size_t i = 0; same && i < ha.mapping_graphs[l].size(); ++i)
                same &= hb.mapping_graphs[l][i].neighbors == ha.mapping_graphs[l][i].neighbors &&
                        hb.mapping_graphs[l][i].distances == ha.mapping_graphs[l][i].distances;
        for (size_t g = 0; same && g < b.graphs.graphs.size(); ++g)
            for (size_t i = 0; same && i < b.graphs.graphs[g].size(); ++i)
                same &= r.graphs.graphs[g][i].neighbors == b.graphs.graphs[g][i].neighbors &&
                        r.graphs.graphs[g][i].distances == b.graphs.graphs[g][i].distances &&
                        r.graphs.graphs[g][i].ranks == b.graphs.graphs[g][i].ranks;
        same &= r.labels.has_value() == b.labels.has_value();
        if (same && b.labels) same &= r.labels->levels == b.labels->levels;
        if (!same) {
            detail = "round-trip diverged on trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "50 random hierarchies round-tripped bitwise";
    return true;
}

// ---------------------------------------------------------------- 12

bool check_bench_gate(std::string& detail) {
    const int n = 100000;
    DilationSpec spec{16, 4, 4};
    std::mt19937_64 rng(1009);
    const double extent = std::cbrt(static_cast<double>(n)) * 0.05;
    std::uniform_real_distribution<double> uni(0.0, extent);
    std::vector<double> coords(static_cast<size_t>(n) * 3);
    for (double& c : coords) c = uni(rng);
    PointSet ps(std::move(coords));
    SpatialIndex idx(ps);

    std::vector<double> us;
    for (int q = 0; q < 512; ++q) {
        const int center = static_cast<int>(rng() % n);
        const auto a = std::chrono::steady_clock::now();
        NeighborList fast = sparse_knn(idx, center, spec);
        const auto b = std::chrono::steady_clock::now();
        us.push_back(std::chrono::duration<double, std::micro>(b - a).count());

        std::vector<std::pair<double, int>> all;
        all.reserve(n - 1);
        for (int i = 0; i < n; ++i) {
            if (i == center) continue;
            all.emplace_back(squared_distance(ps.point(center), ps.point(i)), i);
        }
        std::sort(all.begin(), all.end());
        std::vector<int> brute;
        for (int rank : selected_ranks(spec)) brute.push_back(all[rank - 1].second);
        if (fast.neighbors != brute) {
            detail = "backend disagreement at query " + std::to_string(center);
            return false;
        }
    }
    std::sort(us.begin(), us.end());
    std::ostringstream os;
    os << "512/512 queries agree on n=100000; kd-tree per-query median " << us[us.size() / 2]
       << " us, p95 " << us[static_cast<size_t>(0.95 * us.size())] << " us";
    detail = os.str();
    return true;
}

const Check kChecks[] = {
    {1, "neighbor expansion count table", check_expansion_table},
    {2, "sparse search equals the rank-filter oracle", check_sparse_oracle},
    {3, "rate 1 reduces to plain nearest neighbors", check_rate1_reduction},
    {4, "valid specs always yield k neighbors", check_cardinality},
    {5, "farthest point sampling is greedily maximal", check_fps_maxmin},
    {6, "autodiff matches central differences", check_gradients},
    {7, "pyramid loss analytic cases", check_maloss_analytic},
    {8, "segmentation metrics match a reimplementation", check_metrics_oracle},
    {9, "multi-rate aggregation structure and oracle", check_dgfa_structure},
    {10, "directional synthetic ablation", check_ablation},
    {11, "graph container round-trip is bitwise", check_dgg1_roundtrip},
    {12, "kd-tree and brute-force backends agree at scale", check_bench_gate},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    int failures = 0;
    for (const Check& c : kChecks) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
            continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %2d [%s] %s%s%s\n", c.id, ok ? "PASS" : "FAIL", c.title,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
