#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgfa/graphgen.hpp"
#include "dgfa/metrics.hpp"
#include "dgfa/scene.hpp"
#include "dgfa/train.hpp"

namespace dgfa {

// --- cloud files: ASCII "x y z [r g b] [label]" or ASCII PLY ---

struct CloudData {
    PointSet points;
    std::vector<double> rgb;  // empty or n*3
    std::vector<int> labels;  // empty or n
};

CloudData read_cloud(const std::string& path);
void write_cloud_xyz(const std::string& path, const CloudData& cloud);

// --- DGG1 graph container ---

struct GraphBundle {
    Hierarchy hierarchy;
    DilatedGraphSet graphs;
    std::optional<LabelPyramid> labels;
    int class_count = 0;
};

void write_dgg1(const std::string& path, const GraphBundle& bundle);
GraphBundle read_dgg1(const std::string& path);

// --- parameter checkpoints: name table + little-endian f64 arrays ---

void save_checkpoint(const std::string& path, const ParamStore& store);
// Shapes must match the store built from the model config.
void load_checkpoint(const std::string& path, ParamStore& store);

// --- JSON configs (unknown keys rejected) ---

TrainConfig load_train_config(const std::string& path);
void save_train_config(const std::string& path, const TrainConfig& cfg);
SceneSpec load_scene_spec(const std::string& path);

// --- reports ---

void write_history_csv(const std::string& path, const std::vector<double>& loss_history);
void write_metrics_json(const std::string& path, const Metrics& m,
                        const std::vector<std::string>& class_names);
void write_class_iou_csv(const std::string& path, const Metrics& m,
                         const std::vector<std::string>& class_names);
void write_ablation_csv(const std::string& path, const AblationResult& res,
                        const std::vector<std::string>& class_names);
void write_ablation_json(const std::string& path, const AblationResult& res,
                         const std::vector<std::string>& class_names);

}  // namespace dgfa
