#include "dgfa/graphgen.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgfa {

Hierarchy build_hierarchy(const PointSet& cloud, const std::vector<int>& ratios, int k,
                          int start) {
    cloud.validate();
    if (ratios.empty()) throw std::invalid_argument("build_hierarchy: ratios empty");
    long long product = 1;
    for (int r : ratios) {
        if (r < 1) throw std::invalid_argument("build_hierarchy: ratio must be >= 1");
        product *= r;
    }
    if (product > cloud.n())
        throw std::invalid_argument("build_hierarchy: ratios exhaust the cloud");
    if (k < 1) throw std::invalid_argument("build_hierarchy: k must be >= 1");

    Hierarchy h;
    h.k = k;
    h.ratios = ratios;
    h.start = start;

    const int levels = static_cast<int>(ratios.size()) + 1;
    h.level_points.resize(levels);
    h.level_indices.resize(levels);
    h.fps_indices.resize(levels - 1);

    h.level_points[0] = cloud;
    h.level_indices[0].resize(cloud.n());
    for (int i = 0; i < cloud.n(); ++i) h.level_indices[0][i] = i;

    for (int l = 1; l < levels; ++l) {
        const PointSet& parent = h.level_points[l - 1];
        const int size = std::max(1, parent.n() / ratios[l - 1]);
        const int fps_start = (l == 1) ? start : 0;
        if (fps_start < 0 || fps_start >= parent.n())
            throw std::invalid_argument("build_hierarchy: start index out of range");
        std::vector<int> sel = farthest_point_sample(parent, size, fps_start);
        h.fps_indices[l - 1] = sel;
        PointSet sub;
        sub.coords.reserve(static_cast<size_t>(size) * 3);
        h.level_indices[l].reserve(size);
        for (int idx : sel) {
            const double* p = parent.point(idx);
            sub.coords.insert(sub.coords.end(), p, p + 3);
            h.level_indices[l].push_back(h.level_indices[l - 1][idx]);
        }
        h.level_points[l] = std::move(sub);
    }

    const int coarsest = h.level_points.back().n();
    if (k > coarsest - 1)
        throw std::invalid_argument("build_hierarchy: k too large for the coarsest level");

    h.sub_graphs.resize(levels);
    h.mapping_graphs.resize(levels - 1);
    std::vector<SpatialIndex> indices;
    indices.reserve(levels);
    for (int l = 0; l < levels; ++l) indices.emplace_back(h.level_points[l]);

    for (int l = 0; l < levels; ++l) {
        const int n = h.level_points[l].n();
        h.sub_graphs[l].reserve(n);
        for (int i = 0; i < n; ++i) h.sub_graphs[l].push_back(indices[l].knn(i, k));
    }
    // Mapping graph: coarse center queries the parent level; the physically
    // identical parent point is a valid neighbor (distance 0, rank 1).
    for (int l = 1; l < levels; ++l) {
        const int n = h.level_points[l].n();
        h.mapping_graphs[l - 1].reserve(n);
        for (int i = 0; i < n; ++i) {
            h.mapping_graphs[l - 1].push_back(
                indices[l - 1].knn_at(h.level_points[l].point(i), k, -1, i));
        }
    }
    return h;
}

LabelPyramid label_pyramid(const std::vector<int>& labels, int class_count, const Hierarchy& h) {
    if (static_cast<int>(labels.size()) != h.level_size(0))
        throw std::invalid_argument("label_pyramid: label count does not match cloud size");
    for (int v : labels)
        if (v < 0 || v >= class_count)
            throw std::invalid_argument("label_pyramid: label out of range");
    LabelPyramid p;
    p.levels.resize(h.level_count());
    for (int l = 0; l < h.level_count(); ++l) {
        p.levels[l].reserve(h.level_size(l));
        for (int idx : h.level_indices[l]) p.levels[l].push_back(labels[idx]);
    }
    return p;
}

DilatedGraphSet build_dilated_graphs(const PointSet& points, const DilationSpec& spec_base,
                                     const std::vector<int>& rates) {
    points.validate();
    spec_base.validate();
    if (rates.empty()) throw std::invalid_argument("build_dilated_graphs: rates empty");
    for (size_t i = 1; i < rates.size(); ++i)
        if (rates[i] <= rates[i - 1])
            throw std::invalid_argument("build_dilated_graphs: rates must be strictly increasing");

    DilatedGraphSet set;
    set.base = spec_base;
    set.rates = rates;
    SpatialIndex index(points);
    for (int rate : rates) {
        DilationSpec spec = spec_base;
        spec.rate = rate;
        if (expansion_count(spec) > points.n() - 1)
            throw std::invalid_argument("build_dilated_graphs: cloud too small for rate's K_s");
        std::vector<NeighborList> graph;
        graph.reserve(points.n());
        for (int i = 0; i < points.n(); ++i) graph.push_back(sparse_knn(index, i, spec));
        set.graphs.push_back(std::move(graph));
    }
    return set;
}

}  // namespace dgfa
