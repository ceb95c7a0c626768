#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <vector>

#include "fraclap/errors.hpp"
#include "fraclap/mesh.hpp"

using namespace fraclap;

namespace {

double ulps_of(double scale) { return std::nextafter(scale, 2.0 * scale) - scale; }

}  // namespace

TEST_CASE("graded nodes follow the closed form") {
    const GradedMesh m = build_graded_mesh(0.0, 2.0, 4, 2.0);
    const double want[] = {0.0, 0.25, 1.0, 1.75, 2.0};
    for (int i = 0; i <= 4; ++i) {
        CHECK(m.node(i) == doctest::Approx(want[i]).epsilon(1e-15));
    }

    const GradedMesh u = build_graded_mesh(0.0, 2.0, 4, 1.0);
    const double want_u[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    for (int i = 0; i <= 4; ++i) {
        CHECK(u.node(i) == want_u[i]);
    }

    const GradedMesh c = build_graded_mesh(0.0, 2.0, 6, 3.0);
    const double want_c[] = {0.0, 1.0 / 27, 8.0 / 27, 1.0, 46.0 / 27, 53.0 / 27, 2.0};
    for (int i = 0; i <= 6; ++i) {
        CHECK(std::abs(c.node(i) - want_c[i]) <= 4 * ulps_of(2.0));
    }
}

TEST_CASE("construction rejects bad parameters with distinct messages") {
    CHECK_THROWS_WITH_AS(build_graded_mesh(0.0, 2.0, 5, 1.0), "mesh: N must be even",
                         validation_error);
    CHECK_THROWS_WITH_AS(build_graded_mesh(0.0, 2.0, 2, 1.0), "mesh: N must be at least 4",
                         validation_error);
    CHECK_THROWS_WITH_AS(build_graded_mesh(0.0, 2.0, 8, 0.5),
                         "mesh: grading parameter kappa must be >= 1", validation_error);
    CHECK_THROWS_WITH_AS(build_graded_mesh(2.0, 0.0, 8, 1.0),
                         "mesh: right endpoint must exceed left endpoint", validation_error);
    // Grading so strong the first cell underflows.
    CHECK_THROWS_AS(build_graded_mesh(0.0, 2.0, 1024, 300.0), validation_error);
}

TEST_CASE("mesh invariants") {
    for (double kappa : {1.0, 2.0, 3.0}) {
        for (int n : {4, 6, 64, 130}) {
            const GradedMesh m = build_graded_mesh(-1.0, 1.0, n, kappa);
            // strictly increasing, endpoints exact
            CHECK(m.node(0) == -1.0);
            CHECK(m.node(n) == 1.0);
            for (int i = 1; i <= n; ++i) {
                CHECK(m.node(i) > m.node(i - 1));
                CHECK(m.step(i) > 0.0);
            }
            // bit-exact reflection symmetry by construction
            for (int i = 0; i <= n; ++i) {
                CHECK(m.node(n - i) == -1.0 + 1.0 - m.node(i));
                CHECK(m.dist_right(i) == m.dist_left(n - i));
            }
            // steps sum to b-a
            double sum = 0.0;
            for (int i = 1; i <= n; ++i) {
                sum += m.step(i);
            }
            CHECK(std::abs(sum - 2.0) <= 8 * ulps_of(2.0));
            // first cell is exactly L (2/N)^kappa
            const double first = 1.0 * std::exp(kappa * std::log(2.0 / n));
            CHECK(m.step(1) == doctest::Approx(first).epsilon(1e-14));
        }
    }
}

TEST_CASE("kappa=1 is uniform to a few ulps of the domain length") {
    // Steps are differences of node-scale values, so their rounding is a few
    // ulps of b-a, not of h itself.
    const int n = 130;
    const GradedMesh m = build_graded_mesh(0.0, 2.0, n, 1.0);
    const double h = 2.0 / n;
    for (int i = 1; i <= n; ++i) {
        CHECK(std::abs(m.step(i) - h) <= 4 * ulps_of(2.0));
    }
    // power-of-two N lands exactly
    const GradedMesh p = build_graded_mesh(0.0, 2.0, 64, 1.0);
    for (int i = 1; i <= 64; ++i) {
        CHECK(p.step(i) == 2.0 / 64);
    }
}

TEST_CASE("mesh_stats examples") {
    const MeshStats s1 = mesh_stats(build_graded_mesh(0.0, 2.0, 4, 1.0));
    CHECK(s1.h_min == 0.5);
    CHECK(s1.h_max == 0.5);

    const MeshStats s2 = mesh_stats(build_graded_mesh(0.0, 2.0, 4, 2.0));
    CHECK(s2.h_min == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s2.h_max == doctest::Approx(0.75).epsilon(1e-15));

    const MeshStats s3 = mesh_stats(build_graded_mesh(0.0, 2.0, 6, 3.0));
    CHECK(s3.h_min == doctest::Approx(1.0 / 27).epsilon(1e-14));
    CHECK(s3.h_max == doctest::Approx(19.0 / 27).epsilon(1e-14));
}

TEST_CASE("reversal maps the node set onto itself") {
    const GradedMesh m = build_graded_mesh(0.5, 3.5, 32, 2.5);
    std::vector<double> nodes(m.nodes().begin(), m.nodes().end());
    std::vector<double> reflected;
    for (double x : m.nodes()) {
        reflected.push_back(0.5 + 3.5 - x);
    }
    std::sort(nodes.begin(), nodes.end());
    std::sort(reflected.begin(), reflected.end());
    for (size_t k = 0; k < nodes.size(); ++k) {
        CHECK(std::abs(nodes[k] - reflected[k]) <= 2 * ulps_of(3.0));
    }
}

TEST_CASE("step upper bound h_i <= C N^{-kappa} i^{kappa-1} on the left half") {
    // Mean-value bound with the fixed constant C = L kappa 2^kappa:
    // h_i = L[(2i/N)^k - (2(i-1)/N)^k] <= L k (2/N)(2i/N)^{k-1}.
    const double kappa = 2.5;
    const double c_fixed = 1.0 * kappa * std::pow(2.0, kappa);
    for (int n : {64, 128, 256, 512}) {
        const GradedMesh m = build_graded_mesh(0.0, 2.0, n, kappa);
        for (int i = 1; i <= n / 2; ++i) {
            CHECK(m.step(i) <= (1.0 + 1e-12) * c_fixed * std::pow(static_cast<double>(n), -kappa) *
                                   std::pow(static_cast<double>(i), kappa - 1.0));
        }
    }
}

TEST_CASE("doubling N halves h_max within 5% for N >= 64") {
    for (double kappa : {1.0, 2.0, 3.0}) {
        double prev = build_graded_mesh(0.0, 2.0, 64, kappa).h_max();
        for (int n : {128, 256, 512}) {
            const double cur = build_graded_mesh(0.0, 2.0, n, kappa).h_max();
            CHECK(cur / prev == doctest::Approx(0.5).epsilon(0.05));
            prev = cur;
        }
    }
}

TEST_CASE("strong grading keeps steps positive where absolute nodes collapse") {
    // kappa = 8, N = 512: x_1 = 2^{-64}, so b - x_1 rounds to b and the last
    // two node coordinates coincide in double precision; the step array must
    // still be positive and symmetric.
    const GradedMesh m = build_graded_mesh(0.0, 2.0, 512, 8.0);
    CHECK(m.node(511) == 2.0);  // representability, not a bug
    CHECK(m.step(512) == m.step(1));
    CHECK(m.step(512) > 0.0);
    CHECK(m.dist_right(511) == m.step(1));
    CHECK(m.h_min() == m.step(1));
}
