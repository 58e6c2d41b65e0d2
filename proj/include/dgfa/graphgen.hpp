#pragma once

#include <vector>

#include "dgfa/pointset.hpp"
#include "dgfa/spatial.hpp"

namespace dgfa {

// Hierarchical structure precomputed once per cloud: per-level point subsets
// via FPS, per-level KNN sub-graphs, and cross-level mapping graphs used for
// pooling. Immutable after build.
//
// Level 0 is the full cloud. Sub-graphs exist for every level including level
// 0 (the first encoder block convolves at full resolution before pooling).
// Mapping graph l (stored at index l-1) connects each level-l point to its k
// nearest level-(l-1) points; indices are local to each level.
struct Hierarchy {
    std::vector<std::vector<int>> level_indices;            // into level 0; [0] is identity
    std::vector<PointSet> level_points;
    std::vector<std::vector<int>> fps_indices;              // per level l>=1, into parent level
    std::vector<std::vector<NeighborList>> sub_graphs;      // per level 0..L
    std::vector<std::vector<NeighborList>> mapping_graphs;  // per level 1..L at index l-1
    int k = 0;
    std::vector<int> ratios;
    int start = 0;

    int level_count() const { return static_cast<int>(level_points.size()); }
    int level_size(int l) const { return level_points[l].n(); }
};

// Per-level integer label arrays gathered through the composed FPS indices.
struct LabelPyramid {
    std::vector<std::vector<int>> levels;
};

// One sparse-knn graph per dilation rate, same K and step across rates.
struct DilatedGraphSet {
    DilationSpec base;  // k_target and step shared by all rates
    std::vector<int> rates;
    std::vector<std::vector<NeighborList>> graphs;  // graphs[r][i] for rate rates[r]
};

Hierarchy build_hierarchy(const PointSet& cloud, const std::vector<int>& ratios, int k,
                          int start = 0);

LabelPyramid label_pyramid(const std::vector<int>& labels, int class_count, const Hierarchy& h);

DilatedGraphSet build_dilated_graphs(const PointSet& points, const DilationSpec& spec_base,
                                     const std::vector<int>& rates);

}  // namespace dgfa
