#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fraclap {

// Minimal row-major dense matrix, used for the direct-collocation stiffness
// matrix, materialized audit matrices and the elimination baseline.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    double& operator()(int i, int j) {
        return data[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)];
    }
    double operator()(int i, int j) const {
        return data[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)];
    }

    void apply(std::span<const double> v, std::span<double> out) const;
    std::vector<double> apply(std::span<const double> v) const;
};

}  // namespace fraclap
