#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgfa/metrics.hpp"
#include "dgfa/model.hpp"
#include "dgfa/scene.hpp"

namespace dgfa {

struct TrainConfig {
    int epochs = 20;
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 1;  // one scene per step; graphs are per-scene structures
    uint64_t seed = 1;
    std::vector<double> lambdas = {1.0, 1.0, 1.0, 1.0};
    bool mean_reduction = true;
    std::vector<int> ratios = {4, 4, 2};
    int graph_k = 16;
    ModelConfig model;

    void validate() const;
};

// Standard Adam update with bias correction, t is the 1-based step index.
void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps, long long t);

// A scene with its precomputed hierarchy, label pyramid and dilated graphs.
struct SceneData {
    LabeledCloud cloud;
    Tensor features;
    Hierarchy hierarchy;
    LabelPyramid labels;
    DilatedGraphSet graphs;
};

SceneData prepare_scene(const LabeledCloud& cloud, const TrainConfig& cfg);
std::vector<SceneData> prepare_scenes(const std::vector<LabeledCloud>& clouds,
                                      const TrainConfig& cfg);

struct TrainResult {
    std::vector<double> loss_history;  // per-epoch mean loss
    long long steps = 0;
};

// Deterministic training loop: epochs iterate scenes in seeded shuffled order,
// one Adam step per scene. Throws on non-finite loss (message carries
// epoch/step).
TrainResult train(DgfaNet& net, const TrainConfig& cfg, const std::vector<SceneData>& scenes);

// Concatenated prediction over all scenes vs ground truth.
Metrics evaluate_scenes(const DgfaNet& net, const std::vector<SceneData>& scenes);

struct AblationArm {
    std::string name;
    TrainConfig cfg;
};

// The standard arm grid: pyramid loss on/off x aggregation off / chained /
// dense, plus the dilation-rate combinations.
std::vector<AblationArm> standard_arms(const TrainConfig& base);

struct AblationRow {
    std::string arm;
    uint64_t seed;
    Metrics metrics;
    double final_loss = 0.0;
};

struct AblationArmSummary {
    std::string arm;
    double median_miou = 0, min_miou = 0, max_miou = 0;
    double median_oa = 0, median_macc = 0;
    std::vector<double> median_class_iou;
};

struct AblationResult {
    std::vector<AblationRow> rows;
    std::vector<AblationArmSummary> summary;
};

AblationResult ablation_run(const std::vector<AblationArm>& arms,
                            const std::vector<uint64_t>& seeds,
                            const std::vector<LabeledCloud>& train_clouds,
                            const std::vector<LabeledCloud>& eval_clouds, bool verbose = false);

}  // namespace dgfa
