#include "dgfa/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dgfa {

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("TrainConfig: negative epochs");
    if (lr < 0) throw std::invalid_argument("TrainConfig: negative learning rate");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
        throw std::invalid_argument("TrainConfig: betas must lie in [0,1)");
    if (adam_eps <= 0) throw std::invalid_argument("TrainConfig: adam_eps must be > 0");
    if (batch_size != 1) throw std::invalid_argument("TrainConfig: batch_size must be 1");
    if (lambdas.size() != ratios.size() + 1)
        throw std::invalid_argument("TrainConfig: lambda count must equal level count");
    if (graph_k < 1) throw std::invalid_argument("TrainConfig: graph_k < 1");
    model.validate();
}

void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps, long long t) {
    if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (auto& e : store.entries) {
        for (size_t i = 0; i < e.value.data.size(); ++i) {
            const double g = e.grad.data[i];
            if (!std::isfinite(g))
                throw std::runtime_error("adam_step: non-finite gradient in " + e.name);
            e.m.data[i] = beta1 * e.m.data[i] + (1.0 - beta1) * g;
            e.v.data[i] = beta2 * e.v.data[i] + (1.0 - beta2) * g * g;
            const double mhat = e.m.data[i] / bc1;
            const double vhat = e.v.data[i] / bc2;
            e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

SceneData prepare_scene(const LabeledCloud& cloud, const TrainConfig& cfg) {
    SceneData d;
    d.cloud = cloud;
    d.features = make_features(cloud.points, {}, cfg.model.input_channels);
    d.hierarchy = build_hierarchy(cloud.points, cfg.ratios, cfg.graph_k, 0);
    d.labels = label_pyramid(cloud.labels, cfg.model.class_count, d.hierarchy);
    DilationSpec base{cfg.model.dgfa_k, cfg.model.dgfa_step, 1};
    d.graphs = build_dilated_graphs(d.hierarchy.level_points.back(), base, cfg.model.dgfa_rates);
    return d;
}

std::vector<SceneData> prepare_scenes(const std::vector<LabeledCloud>& clouds,
                                      const TrainConfig& cfg) {
    std::vector<SceneData> out;
    out.reserve(clouds.size());
    for (const auto& c : clouds) out.push_back(prepare_scene(c, cfg));
    return out;
}

TrainResult train(DgfaNet& net, const TrainConfig& cfg, const std::vector<SceneData>& scenes) {
    cfg.validate();
    if (scenes.empty()) throw std::invalid_argument("train: no scenes");
    TrainResult res;
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<int> order(scenes.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (int idx : order) {
            const SceneData& sc = scenes[idx];
            Tape t;
            auto ids = net.params().stage(t);
            PyramidVars out = net.forward(t, ids, sc.features, sc.hierarchy, sc.graphs);
            Tape::Var loss = maloss(t, out, sc.labels, cfg.lambdas, cfg.mean_reduction);
            const double lv = t.val(loss).data[0];
            if (!std::isfinite(lv)) {
                char msg[128];
                std::snprintf(msg, sizeof msg, "train: non-finite loss at epoch %d step %lld",
                              epoch, res.steps + 1);
                throw std::runtime_error(msg);
            }
            t.backward(loss);
            net.params().zero_grad();
            net.params().collect(t, ids);
            ++res.steps;
            adam_step(net.params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps, res.steps);
            epoch_loss += lv;
        }
        res.loss_history.push_back(epoch_loss / static_cast<double>(scenes.size()));
    }
    return res;
}

Metrics evaluate_scenes(const DgfaNet& net, const std::vector<SceneData>& scenes) {
    std::vector<int> pred, gt;
    for (const auto& sc : scenes) {
        std::vector<int> p = net.predict(sc.features, sc.hierarchy, sc.graphs);
        pred.insert(pred.end(), p.begin(), p.end());
        gt.insert(gt.end(), sc.cloud.labels.begin(), sc.cloud.labels.end());
    }
    return evaluate(pred, gt, net.config().class_count);
}

std::vector<AblationArm> standard_arms(const TrainConfig& base) {
    std::vector<AblationArm> arms;
    auto with = [&](const std::string& name, bool maloss_on, DgfaMode mode,
                    std::vector<int> rates) {
        AblationArm a{name, base};
        if (!maloss_on) {
            a.cfg.lambdas.assign(base.lambdas.size(), 0.0);
            a.cfg.lambdas[0] = 1.0;
        }
        a.cfg.model.dgfa_mode = mode;
        a.cfg.model.dgfa_rates = std::move(rates);
        arms.push_back(std::move(a));
    };
    // Table-4 shaped grid
    with("base", false, DgfaMode::Off, {1});
    with("maloss", true, DgfaMode::Off, {1});
    with("maloss+nodense", true, DgfaMode::NoDense, base.model.dgfa_rates);
    with("maloss+dense", true, DgfaMode::Dense, base.model.dgfa_rates);
    // Table-5 shaped rate combinations (MALoss on, dense)
    with("rates{1}", true, DgfaMode::Dense, {1});
    with("rates{1,2}", true, DgfaMode::Dense, {1, 2});
    with("rates{2,4}", true, DgfaMode::Dense, {2, 4});
    with("rates{1,4}", true, DgfaMode::Dense, {1, 4});
    with("rates{1,2,4,8}", true, DgfaMode::Dense, {1, 2, 4, 8});
    return arms;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AblationResult ablation_run(const std::vector<AblationArm>& arms,
                            const std::vector<uint64_t>& seeds,
                            const std::vector<LabeledCloud>& train_clouds,
                            const std::vector<LabeledCloud>& eval_clouds, bool verbose) {
    if (arms.empty() || seeds.empty()) throw std::invalid_argument("ablation_run: empty arms or seeds");
    AblationResult res;
    for (const auto& arm : arms) {
        arm.cfg.validate();
        std::vector<SceneData> train_scenes, eval_scenes;
        try {
            train_scenes = prepare_scenes(train_clouds, arm.cfg);
            eval_scenes = prepare_scenes(eval_clouds, arm.cfg);
        } catch (const std::exception& e) {
            throw std::runtime_error("ablation arm '" + arm.name + "' failed: " + e.what());
        }
        std::vector<double> mious, oas, maccs;
        std::vector<std::vector<double>> class_ious;
        for (uint64_t seed : seeds) {
            TrainConfig cfg = arm.cfg;
            cfg.seed = seed;
            DgfaNet net(cfg.model, seed);
            try {
                TrainResult tr = train(net, cfg, train_scenes);
                Metrics m = evaluate_scenes(net, eval_scenes);
                res.rows.push_back({arm.name, seed, m,
                                    tr.loss_history.empty() ? 0.0 : tr.loss_history.back()});
                mious.push_back(m.mean_iou);
                oas.push_back(m.overall_accuracy);
                maccs.push_back(m.mean_class_accuracy);
                class_ious.push_back(m.per_class_iou);
                if (verbose)
                    std::fprintf(stderr, "[ablation] arm=%s seed=%llu mIoU=%.4f OA=%.4f\n",
                                 arm.name.c_str(), static_cast<unsigned long long>(seed),
                                 m.mean_iou, m.overall_accuracy);
            } catch (const std::exception& e) {
                throw std::runtime_error("ablation arm '" + arm.name + "' failed: " + e.what());
            }
        }
        AblationArmSummary s;
        s.arm = arm.name;
        s.median_miou = median_of(mious);
        s.min_miou = *std::min_element(mious.begin(), mious.end());
        s.max_miou = *std::max_element(mious.begin(), mious.end());
        s.median_oa = median_of(oas);
        s.median_macc = median_of(maccs);
        const int C = arm.cfg.model.class_count;
        s.median_class_iou.resize(C, 0.0);
        for (int c = 0; c < C; ++c) {
            std::vector<double> vals;
            for (const auto& ci : class_ious) vals.push_back(ci[c]);
            s.median_class_iou[c] = median_of(vals);
        }
        res.summary.push_back(std::move(s));
    }
    return res;
}

}  // namespace dgfa
