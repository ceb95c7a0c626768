#include "fraclap/dense.hpp"

namespace fraclap {

void DenseMatrix::apply(std::span<const double> v, std::span<double> out) const {
    for (int i = 0; i < rows; ++i) {
        const double* row = &data[static_cast<size_t>(i) * static_cast<size_t>(cols)];
        double acc = 0.0;
        for (int j = 0; j < cols; ++j) {
            acc += row[j] * v[static_cast<size_t>(j)];
        }
        out[static_cast<size_t>(i)] = acc;
    }
}

std::vector<double> DenseMatrix::apply(std::span<const double> v) const {
    std::vector<double> out(static_cast<size_t>(rows), 0.0);
    apply(v, out);
    return out;
}

}  // namespace fraclap
