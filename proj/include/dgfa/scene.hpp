#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dgfa/pointset.hpp"

namespace dgfa {

// Synthetic indoor rooms whose walls carry thin boards: flat patches coplanar
// with a wall but offset slightly into the room. Classes:
//   0 floor, 1 ceiling, 2 wall, 3 board, 4 clutter.
struct SceneSpec {
    double min_width = 2.5, max_width = 4.5;    // room x extent range (m)
    double min_depth = 2.5, max_depth = 4.5;    // room y extent range (m)
    double min_height = 2.4, max_height = 3.0;  // room z extent range (m)
    int points_per_scene = 4096;
    double board_offset = 0.02;                 // distance from wall plane (m)
    double board_min_w = 0.6, board_max_w = 1.2;
    double board_min_h = 0.5, board_max_h = 0.9;
    int min_boards = 1, max_boards = 3;
    int clutter_objects = 3;
    double noise_sigma = 0.005;  // isotropic Gaussian noise (m)
    std::array<double, 5> class_fractions = {0.20, 0.20, 0.35, 0.15, 0.10};

    void validate() const;
};

constexpr int kSceneClassCount = 5;
extern const char* const kSceneClassNames[kSceneClassCount];

struct LabeledCloud {
    PointSet points;
    std::vector<int> labels;
};

// Deterministic per (spec, seed). Every scene contains at least one board
// flush against a wall; per-class point counts follow class_fractions exactly
// before noise.
std::vector<LabeledCloud> gen_scenes(const SceneSpec& spec, int count, uint64_t seed);

}  // namespace dgfa
