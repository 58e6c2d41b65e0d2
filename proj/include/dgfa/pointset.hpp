#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgfa {

// N points with 3D coordinates (meters). Point identity is the row index.
struct PointSet {
    std::vector<double> coords;  // n*3, row-major

    PointSet() = default;
    explicit PointSet(std::vector<double> c) : coords(std::move(c)) {
        if (coords.size() % 3 != 0)
            throw std::invalid_argument("PointSet: coords size must be a multiple of 3");
    }

    int n() const { return static_cast<int>(coords.size() / 3); }
    const double* point(int i) const { return coords.data() + 3 * static_cast<size_t>(i); }
    double* point(int i) { return coords.data() + 3 * static_cast<size_t>(i); }

    void validate() const {
        if (n() < 1) throw std::invalid_argument("PointSet: empty point set");
        for (double v : coords)
            if (!std::isfinite(v)) throw std::invalid_argument("PointSet: non-finite coordinate");
    }
};

// Search parameters: target neighbor count K, sampling step, dilation rate.
struct DilationSpec {
    int k_target = 1;
    int step = 1;
    int rate = 1;

    void validate() const {
        if (k_target < 1 || step < 1 || rate < 1)
            throw std::invalid_argument("DilationSpec: k_target, step and rate must be >= 1");
    }
};

// Ranked neighbors of one center point. Distances are non-decreasing;
// ranks are 1-based positions among the center's sorted nearest neighbors.
struct NeighborList {
    int center = -1;
    std::vector<int> neighbors;
    std::vector<double> distances;
    std::vector<int> ranks;

    int size() const { return static_cast<int>(neighbors.size()); }
};

inline double squared_distance(const double* a, const double* b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace dgfa
