#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dgfa {

// Dense row-major 64-bit float array.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(count(shape)), fill);
    }
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<long long>(data.size()) != count(shape))
            throw std::invalid_argument("Tensor: data length does not match shape");
    }

    static long long count(const std::vector<int>& s) {
        long long c = 1;
        for (int d : s) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            c *= d;
        }
        return c;
    }

    int size() const { return static_cast<int>(data.size()); }
    int rows() const { return shape.empty() ? 0 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void check_finite(const char* what) const {
        for (double v : data)
            if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite value in ") + what);
    }
};

}  // namespace dgfa
