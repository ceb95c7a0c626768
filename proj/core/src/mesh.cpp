#include "fraclap/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "fraclap/errors.hpp"

namespace fraclap {

namespace {

// (2i/N)^kappa with the i = 0 case special-cased to avoid log(0), and
// kappa = 1 short-circuited so uniform grids come out exactly uniform.
double graded_fraction(int i, int n, double kappa) {
    if (i == 0) {
        return 0.0;
    }
    const double t = 2.0 * static_cast<double>(i) / static_cast<double>(n);
    if (kappa == 1.0) {
        return t;
    }
    return std::exp(kappa * std::log(t));
}

}  // namespace

GradedMesh GradedMesh::build(double a, double b, int n, double kappa) {
    if (!(b > a)) {
        throw validation_error("mesh: right endpoint must exceed left endpoint");
    }
    if (n % 2 != 0) {
        throw validation_error("mesh: N must be even");
    }
    if (n < 4) {
        throw validation_error("mesh: N must be at least 4");
    }
    if (!(kappa >= 1.0)) {
        throw validation_error("mesh: grading parameter kappa must be >= 1");
    }

    GradedMesh mesh;
    mesh.a_ = a;
    mesh.b_ = b;
    mesh.n_ = n;
    mesh.kappa_ = kappa;
    mesh.nodes_.resize(static_cast<size_t>(n) + 1);
    mesh.dist_left_.resize(static_cast<size_t>(n) + 1);

    const double half = 0.5 * (b - a);
    const double span = b - a;
    for (int i = 0; i <= n / 2; ++i) {
        const double d = half * graded_fraction(i, n, kappa);
        mesh.dist_left_[static_cast<size_t>(i)] = d;
        mesh.nodes_[static_cast<size_t>(i)] = a + d;
    }
    for (int i = 0; i < n / 2; ++i) {
        mesh.nodes_[static_cast<size_t>(n - i)] = a + b - mesh.nodes_[static_cast<size_t>(i)];
        mesh.dist_left_[static_cast<size_t>(n - i)] =
            span - mesh.dist_left_[static_cast<size_t>(i)];
    }

    // Left-half steps from the boundary-distance values, right half mirrored
    // bit-exactly; this keeps h_i > 0 even when node(N-1) is not
    // distinguishable from b in double precision (very strong grading).
    mesh.steps_.resize(static_cast<size_t>(n));
    for (int i = 1; i <= n / 2; ++i) {
        const double h = mesh.dist_left_[static_cast<size_t>(i)] -
                         mesh.dist_left_[static_cast<size_t>(i - 1)];
        if (!(h > 0.0)) {
            throw validation_error(
                "mesh: grading too strong for this resolution, nodes collapse "
                "(first cell underflows)");
        }
        mesh.steps_[static_cast<size_t>(i - 1)] = h;
    }
    for (int i = n / 2 + 1; i <= n; ++i) {
        mesh.steps_[static_cast<size_t>(i - 1)] = mesh.steps_[static_cast<size_t>(n - i)];
    }
    mesh.h_min_ = *std::min_element(mesh.steps_.begin(), mesh.steps_.end());
    mesh.h_max_ = *std::max_element(mesh.steps_.begin(), mesh.steps_.end());
    return mesh;
}

MeshStats mesh_stats(const GradedMesh& mesh) {
    return MeshStats{mesh.h_min(), mesh.h_max()};
}

}  // namespace fraclap
