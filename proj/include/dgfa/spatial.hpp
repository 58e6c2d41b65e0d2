#pragma once

#include <vector>

#include "dgfa/pointset.hpp"

namespace dgfa {

// Exact balanced KD-tree over a PointSet. Immutable after construction;
// queries are pure and safe to run from many threads.
//
// Queries return exactly what a brute-force distance sort would, with ties
// broken by smaller point index.
class SpatialIndex {
public:
    explicit SpatialIndex(const PointSet& points);

    const PointSet& points() const { return *points_; }
    int size() const { return points_->n(); }

    // k nearest points to an arbitrary query position. exclude >= 0 removes
    // that point index from consideration (used for self-exclusion).
    NeighborList knn_at(const double* query, int k, int exclude, int center_tag) const;

    // k nearest non-self neighbors of the given point, ranks 1..k.
    NeighborList knn(int center, int k) const;

private:
    struct Node {
        double split = 0.0;
        int axis = -1;       // -1 marks a leaf
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range into order_
    };

    int build(int begin, int end, std::vector<double>& lo, std::vector<double>& hi);

    const PointSet* points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// K_s of Eq-style expansion: how many nearest neighbors must be fetched so
// the sparse rank pattern yields exactly k_target selections. Exact integer
// arithmetic.
int expansion_count(const DilationSpec& spec);

// The 1-based ranks selected by the Sparse-KNN group pattern:
// group i in {1 .. ceil(Ks/(r-1+step))-1} contributes [(i-1)(r+step-1)+r, i(r+step-1)],
// the final group contributes [i*r+(i-1)(step-1), Ks].
std::vector<int> selected_ranks(const DilationSpec& spec);

// True when the rank pattern yields exactly k_target ranks. Some (K, step, rate)
// combinations with K not divisible by step and rate >= 3 select fewer; those
// specs are rejected by sparse_knn.
bool spec_feasible(const DilationSpec& spec);

// Sparse-KNN: fetch the K_s nearest non-self neighbors and keep the ranks
// selected by the group pattern. Result has exactly k_target entries in rank
// order.
NeighborList sparse_knn(const SpatialIndex& index, int center, const DilationSpec& spec);

// Greedy farthest point sampling. First index = start; each subsequent index
// maximizes the minimum distance to all previously selected points, ties by
// smaller index. Deterministic for fixed start.
std::vector<int> farthest_point_sample(const PointSet& points, int m, int start);

}  // namespace dgfa
