#pragma once

#include <span>
#include <vector>

namespace fraclap {

// Symmetric graded partition of (a, b): x_i = a + L (2i/N)^kappa on the left
// half and its mirror image on the right, where L = (b-a)/2. kappa = 1 is the
// uniform grid; larger kappa clusters nodes at both endpoints to resolve
// boundary layers of the form distance^{alpha/2}.
//
// The right half is produced by reflecting the stored left-half nodes,
// x_{N-i} = a + b - x_i, so the symmetry invariant holds bit-exactly.
// Immutable after construction; safe for concurrent reads.
class GradedMesh {
public:
    // Requires b > a, N even and >= 4, kappa >= 1. Throws validation_error
    // otherwise, and also when the grading is so strong that the first node
    // underflows onto the boundary.
    static GradedMesh build(double a, double b, int n, double kappa);

    double a() const { return a_; }
    double b() const { return b_; }
    double half_length() const { return 0.5 * (b_ - a_); }
    int n() const { return n_; }
    double kappa() const { return kappa_; }

    /// Node x_i, 0 <= i <= N.
    double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
    /// Step h_i = x_i - x_{i-1}, 1 <= i <= N. Right-half steps mirror the
    /// left-half ones bit-exactly; they stay positive even when strong
    /// grading makes the absolute coordinates of near-boundary nodes
    /// indistinguishable from b in double precision.
    double step(int i) const { return steps_[static_cast<size_t>(i - 1)]; }

    /// Distances to the endpoints, x_i - a and b - x_i, computed from the
    /// left-half construction values so they keep full relative precision
    /// near both boundaries (node(i) itself cannot, see step()).
    double dist_left(int i) const { return dist_left_[static_cast<size_t>(i)]; }
    double dist_right(int i) const { return dist_left_[static_cast<size_t>(n_ - i)]; }

    std::span<const double> nodes() const { return nodes_; }
    /// steps()[k] holds h_{k+1}.
    std::span<const double> steps() const { return steps_; }

    double h_min() const { return h_min_; }
    double h_max() const { return h_max_; }

private:
    GradedMesh() = default;

    double a_ = 0.0;
    double b_ = 0.0;
    double kappa_ = 1.0;
    int n_ = 0;
    std::vector<double> nodes_;
    std::vector<double> steps_;
    std::vector<double> dist_left_;
    double h_min_ = 0.0;
    double h_max_ = 0.0;
};

inline GradedMesh build_graded_mesh(double a, double b, int n, double kappa) {
    return GradedMesh::build(a, b, n, kappa);
}

struct MeshStats {
    double h_min;
    double h_max;
};

MeshStats mesh_stats(const GradedMesh& mesh);

}  // namespace fraclap
