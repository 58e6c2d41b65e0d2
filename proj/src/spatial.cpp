#include "dgfa/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dgfa {

namespace {

// Candidate ordering: nearer first, ties by smaller index.
struct Candidate {
    double d2;
    int idx;
    bool operator<(const Candidate& o) const {
        return d2 < o.d2 || (d2 == o.d2 && idx < o.idx);
    }
};

}  // namespace

SpatialIndex::SpatialIndex(const PointSet& points) : points_(&points) {
    points.validate();
    const int n = points.n();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * static_cast<size_t>(n) / 8 + 4);
    std::vector<double> lo(3, std::numeric_limits<double>::infinity());
    std::vector<double> hi(3, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], points.point(i)[a]);
            hi[a] = std::max(hi[a], points.point(i)[a]);
        }
    root_ = build(0, n, lo, hi);
}

int SpatialIndex::build(int begin, int end, std::vector<double>& lo, std::vector<double>& hi) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    constexpr int kLeafSize = 12;
    if (end - begin <= kLeafSize) {
        nodes_[node_id].begin = begin;
        nodes_[node_id].end = end;
        return node_id;
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double va = points_->point(a)[axis];
                         const double vb = points_->point(b)[axis];
                         return va < vb || (va == vb && a < b);
                     });
    const double split = points_->point(order_[mid])[axis];

    nodes_[node_id].axis = axis;
    nodes_[node_id].split = split;
    const double saved_hi = hi[axis];
    hi[axis] = split;
    const int left = build(begin, mid, lo, hi);
    hi[axis] = saved_hi;
    const double saved_lo = lo[axis];
    lo[axis] = split;
    const int right = build(mid, end, lo, hi);
    lo[axis] = saved_lo;
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
}

NeighborList SpatialIndex::knn_at(const double* query, int k, int exclude, int center_tag) const {
    const int n = points_->n();
    const int avail = n - (exclude >= 0 ? 1 : 0);
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    if (k > avail) throw std::invalid_argument("knn: k exceeds available neighbor count");

    // Max-heap on candidate ordering: top() is the current worst keeper.
    std::vector<Candidate> heap;
    heap.reserve(static_cast<size_t>(k) + 1);
    auto worse = [](const Candidate& a, const Candidate& b) { return a < b; };

    auto offer = [&](int idx) {
        if (idx == exclude) return;
        Candidate c{squared_distance(query, points_->point(idx)), idx};
        if (static_cast<int>(heap.size()) < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    };

    // Iterative traversal, near child first. A subtree is pruned only when the
    // splitting-plane distance strictly exceeds the current worst distance:
    // at equal distance a smaller index might still win the tie-break.
    std::vector<std::pair<int, double>> stack;  // (node, min possible d2)
    stack.emplace_back(root_, 0.0);
    while (!stack.empty()) {
        auto [node_id, min_d2] = stack.back();
        stack.pop_back();
        if (static_cast<int>(heap.size()) == k && min_d2 > heap.front().d2) continue;
        const Node& node = nodes_[node_id];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) offer(order_[i]);
            continue;
        }
        const double diff = query[node.axis] - node.split;
        const double far_d2 = diff * diff;
        const int near_child = diff < 0.0 ? node.left : node.right;
        const int far_child = diff < 0.0 ? node.right : node.left;
        stack.emplace_back(far_child, far_d2);
        stack.emplace_back(near_child, min_d2);
    }

    std::sort(heap.begin(), heap.end());
    NeighborList out;
    out.center = center_tag;
    out.neighbors.reserve(k);
    out.distances.reserve(k);
    out.ranks.reserve(k);
    for (int r = 0; r < k; ++r) {
        out.neighbors.push_back(heap[r].idx);
        out.distances.push_back(std::sqrt(heap[r].d2));
        out.ranks.push_back(r + 1);
    }
    return out;
}

NeighborList SpatialIndex::knn(int center, int k) const {
    if (center < 0 || center >= points_->n())
        throw std::invalid_argument("knn: center index out of range");
    return knn_at(points_->point(center), k, center, center);
}

int expansion_count(const DilationSpec& spec) {
    spec.validate();
    const long long k = spec.k_target, step = spec.step, r = spec.rate;
    const long long span = step + (r - 1) * (step - 1);
    const long long q = k / step;
    const long long rem = k % step;
    // ceil(rem/step * span) with exact integers
    const long long partial = (rem * span + step - 1) / step;
    return static_cast<int>(q * span + partial);
}

std::vector<int> selected_ranks(const DilationSpec& spec) {
    const int ks = expansion_count(spec);
    const int r = spec.rate, step = spec.step;
    const int span = step + (r - 1) * (step - 1);
    const int skip = (r - 1) * (step - 1);
    const int groups = (ks + span - 1) / span;  // ceil
    std::vector<int> ranks;
    ranks.reserve(spec.k_target);
    // each group skips the first (r-1)(step-1) ranks, then takes the rest
    for (int i = 1; i <= groups - 1; ++i)
        for (int t = (i - 1) * span + skip + 1; t <= i * span; ++t) ranks.push_back(t);
    for (int t = (groups - 1) * span + skip + 1; t <= ks; ++t) ranks.push_back(t);
    return ranks;
}

bool spec_feasible(const DilationSpec& spec) {
    return static_cast<int>(selected_ranks(spec).size()) == spec.k_target;
}

NeighborList sparse_knn(const SpatialIndex& index, int center, const DilationSpec& spec) {
    const std::vector<int> ranks = selected_ranks(spec);
    if (static_cast<int>(ranks.size()) != spec.k_target)
        throw std::invalid_argument("sparse_knn: rank pattern does not yield k_target selections");
    const int ks = expansion_count(spec);
    if (ks > index.size() - 1)
        throw std::invalid_argument("sparse_knn: expansion count exceeds available points");
    const NeighborList full = index.knn(center, ks);
    NeighborList out;
    out.center = center;
    out.neighbors.reserve(ranks.size());
    out.distances.reserve(ranks.size());
    out.ranks = ranks;
    for (int rank : ranks) {
        out.neighbors.push_back(full.neighbors[rank - 1]);
        out.distances.push_back(full.distances[rank - 1]);
    }
    return out;
}

std::vector<int> farthest_point_sample(const PointSet& points, int m, int start) {
    points.validate();
    const int n = points.n();
    if (m < 1 || m > n) throw std::invalid_argument("farthest_point_sample: m out of range");
    if (start < 0 || start >= n)
        throw std::invalid_argument("farthest_point_sample: start index out of range");

    std::vector<int> selected;
    selected.reserve(m);
    std::vector<char> taken(n, 0);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    int current = start;
    selected.push_back(current);
    taken[current] = 1;
    for (int s = 1; s < m; ++s) {
        const double* p = points.point(current);
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            const double d2 = squared_distance(p, points.point(i));
            if (d2 < min_d2[i]) min_d2[i] = d2;
            if (!taken[i] && min_d2[i] > best_d2) {
                best_d2 = min_d2[i];
                best = i;
            }
        }
        current = best;
        selected.push_back(current);
        taken[current] = 1;
    }
    return selected;
}

}  // namespace dgfa
