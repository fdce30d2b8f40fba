#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fbmbax/fbm_kernels.hpp"
#include "fbmbax/fbm_simulation.hpp"

using namespace fbmbax;

namespace {
double rel(double got, double want) { return std::abs(got / want - 1.0); }
} // namespace

TEST_CASE("covariance function: normalization, origin, symmetry") {
    for (double h : {0.1, 0.25, 0.4}) {
        hurst_index H(h);
        CHECK(fbm_cov(1.0, 1.0, H) == 1.0);
        CHECK(fbm_cov(0.0, 0.7, H) == 0.0);
        CHECK(fbm_cov(0.7, 0.0, H) == 0.0);
        CHECK(fbm_cov(0.3, -1.7, H) == fbm_cov(-1.7, 0.3, H));
        CHECK(rel(fbm_cov(2.5, 2.5, H), std::pow(2.5, 2.0 * h)) < 1e-15);
    }
    // 0.5 * (1 + 1 - 2^{2H}) at H = 1/4
    CHECK(std::abs(fbm_cov(1.0, -1.0, hurst_index(0.25)) -
                   0.29289321881345247560) < 1e-15);
    // negative correlation of disjoint increments below H = 1/2
    CHECK(fbm_cov(1.0, -1.0, hurst_index(0.25)) <
          fbm_cov(1.0, 1.0, hurst_index(0.25)));
}

TEST_CASE("midpoint grid construction") {
    auto g = make_midpoint_grid(-4.0, 0.0, 4);
    CHECK(g.ds == 1.0);
    REQUIRE(g.points.size() == 4);
    CHECK(g.points[0] == -3.5);
    CHECK(g.points[1] == -2.5);
    CHECK(g.points[3] == -0.5);
    CHECK(g.points.front() > g.t0);
    CHECK(g.points.back() < g.t1);

    CHECK_THROWS_AS(make_midpoint_grid(0.0, 0.0, 4), validation_error);
    CHECK_THROWS_AS(make_midpoint_grid(0.0, 1.0, 0), validation_error);
}

TEST_CASE("path simulation is exact-covariance and reproducible") {
    hurst_index H(0.25);
    auto g = make_midpoint_grid(-4.0, 0.0, 16);

    SECTION("zero paths yields an empty ensemble with the right shape") {
        auto ens = simulate_paths(g, 1.0, H, 0, 1);
        CHECK(ens.values.rows() == 0);
        CHECK(ens.values.cols() == 17);
        CHECK(ens.times.size() == 17);
        CHECK(ens.times.back() == 1.0);
    }

    SECTION("identical seeds give identical ensembles") {
        auto e1 = simulate_paths(g, 1.0, H, 300, 42);
        auto e2 = simulate_paths(g, 1.0, H, 300, 42);
        CHECK((e1.values.array() == e2.values.array()).all());
        // regression anchor for the generator itself
        CHECK(std::abs(e1.values(0, 0) - 0.66999435193128654) < 1e-15);

        auto e3 = simulate_paths(g, 1.0, H, 300, 43);
        CHECK((e1.values.array() != e3.values.array()).any());
    }

    SECTION("ensemble does not depend on how paths are partitioned") {
        // 600 paths span three generator blocks; the first 300 rows must
        // match a 300-path run bit for bit
        auto e1 = simulate_paths(g, 1.0, H, 300, 42);
        auto e3 = simulate_paths(g, 1.0, H, 600, 42);
        CHECK((e1.values.array() == e3.values.topRows(300).array()).all());
    }

    SECTION("target time equal to a grid point is rejected") {
        CHECK_THROWS_AS(simulate_paths(g, g.points[3], H, 10, 1),
                        validation_error);
    }

    SECTION("hand-built grid with non-increasing points is rejected") {
        sample_grid bad{{0.5, 0.5}, 0.0, 1.0, 0.5};
        CHECK_THROWS_AS(simulate_paths(bad, 2.0, H, 10, 1), validation_error);
        CHECK_THROWS_AS(simulate_paths(sample_grid{{}, 0.0, 1.0, 0.1}, 2.0, H,
                                       10, 1),
                        validation_error);
    }
}

TEST_CASE("empirical moments match the covariance within 3 sigma") {
    hurst_index H(0.25);
    auto g = make_midpoint_grid(-4.0, 0.0, 256);
    const int paths = 10000;
    auto ens = simulate_paths(g, 1.0, H, paths, 20260814);

    for (int col : {10, 100, 255, 256}) {
        const double t = ens.times[col];
        const double want = fbm_cov(t, t, H);
        const double got =
            ens.values.col(col).squaredNorm() / static_cast<double>(paths);
        // variance of the sample variance of a Gaussian: 2 var^2 / N
        const double band = 3.0 * want * std::sqrt(2.0 / paths);
        CHECK(std::abs(got - want) <= band);
    }

    const int i = 50, j = 200;
    const double want = fbm_cov(ens.times[i], ens.times[j], H);
    const double got = ens.values.col(i).dot(ens.values.col(j)) /
                       static_cast<double>(paths);
    const double band =
        3.0 * std::sqrt((fbm_cov(ens.times[i], ens.times[i], H) *
                             fbm_cov(ens.times[j], ens.times[j], H) +
                         want * want) /
                        paths);
    CHECK(std::abs(got - want) <= band);
}

TEST_CASE("Gram predictor: degeneracy, refinement invariants, conditioning") {
    hurst_index H(0.25);

    SECTION("grid consisting of the target alone predicts exactly") {
        sample_grid g{{1.0}, 1.0, 1.0, 0.0};
        auto gp = gram_optimal_predictor(g, 1.0, H);
        REQUIRE(gp.weights.size() == 1);
        CHECK(std::abs(gp.weights(0) - 1.0) < 1e-14);
        CHECK(gp.mse == 0.0);
    }

    SECTION("MSE decreases weakly under refinement, residual is tiny") {
        double prev = std::numeric_limits<double>::infinity();
        for (int n : {64, 128, 256}) {
            auto g = make_midpoint_grid(-4.0, 0.0, n);
            auto gp = gram_optimal_predictor(g, 1.0, H);
            CHECK(gp.mse <= prev + 1e-12);
            prev = gp.mse;

            // orthogonality of the residual: Gram w - cross vanishes
            auto cov = detail::covariance_matrix(g.points, H);
            Eigen::VectorXd cross(n);
            for (int i = 0; i < n; ++i)
                cross(i) = fbm_cov(g.points[i], 1.0, H);
            CHECK((cov * gp.weights - cross).cwiseAbs().maxCoeff() < 1e-10);
        }
        // regression anchors for the solved MSEs
        auto g64 = make_midpoint_grid(-4.0, 0.0, 64);
        auto g256 = make_midpoint_grid(-4.0, 0.0, 256);
        CHECK(std::abs(gram_optimal_predictor(g64, 1.0, H).mse -
                       0.847877847099) < 1e-9);
        CHECK(std::abs(gram_optimal_predictor(g256, 1.0, H).mse -
                       0.845713873238) < 1e-9);
    }

    SECTION("near-coincident points trip the conditioning guard") {
        // adjacent representable doubles at high H leave the Gram matrix
        // numerically rank one
        hurst_index Hh(0.49);
        sample_grid g{{1.0, std::nextafter(1.0, 2.0)}, 0.0, 2.0, 0.1};
        try {
            gram_optimal_predictor(g, 2.0, Hh);
            FAIL("expected a conditioning failure");
        } catch (const non_convergence_error& e) {
            CHECK(std::string(e.what()).find("ill-conditioned") !=
                  std::string::npos);
            CHECK(e.error_bound < 1e-14);
        }
    }
}

TEST_CASE("kernel predictor: optimality gap, discretization convergence") {
    hurst_index H(0.25);
    const auto kern = [&](double s) { return psi0_finite(s, 1.0, 4.0, H); };

    SECTION("zero weights recover the unconditional variance") {
        auto g = make_midpoint_grid(-4.0, 0.0, 32);
        auto kp = kernel_predictor_mse(g, 1.0, H, [](double) { return 0.0; });
        CHECK(rel(kp.mse_theoretical, 1.0) < 1e-15); // |t2|^{2H} at t2 = 1
        CHECK(!kp.mse_empirical.has_value());
    }

    SECTION("weight extraction applies the cell width") {
        auto g = make_midpoint_grid(-4.0, 0.0, 8);
        auto w = kernel_weights(g, kern);
        REQUIRE(w.size() == 8);
        for (int i = 0; i < 8; ++i)
            CHECK(rel(w(i), psi0_finite(-g.points[i], 1.0, 4.0, H) * g.ds) <
                  1e-15);
    }

    SECTION("no fixed weights beat the Gram optimum") {
        auto g = make_midpoint_grid(-4.0, 0.0, 64);
        auto gp = gram_optimal_predictor(g, 1.0, H);
        for (double scale : {0.0, 0.3, 1.0}) {
            auto kp = kernel_predictor_mse(
                g, 1.0, H, [&](double s) { return scale * kern(s); });
            CHECK(gp.mse <= kp.mse_theoretical + 1e-12);
        }
    }

    SECTION("discretized kernel closes in on the Gram weights") {
        double prev_dist = std::numeric_limits<double>::infinity();
        double dist_final = 0.0, excess_final = 0.0;
        for (int n : {64, 128, 256}) {
            auto g = make_midpoint_grid(-4.0, 0.0, n);
            auto gp = gram_optimal_predictor(g, 1.0, H);
            auto kp = kernel_predictor_mse(g, 1.0, H, kern);
            CHECK(gp.mse <= kp.mse_theoretical);
            dist_final = interior_weight_distance(kp.weights, gp.weights);
            CHECK(dist_final < prev_dist);
            prev_dist = dist_final;
            excess_final = kp.mse_theoretical / gp.mse - 1.0;
        }
        CHECK(dist_final < 0.05);
        CHECK(std::abs(dist_final - 0.043480) < 5e-4);
        CHECK(excess_final < 1e-3);
    }
}

TEST_CASE("empirical MSE agrees with the quadratic form") {
    hurst_index H(0.25);
    auto g = make_midpoint_grid(-4.0, 0.0, 256);
    const int paths = 10000;
    auto ens = simulate_paths(g, 1.0, H, paths, 20260814);
    const auto kern = [&](double s) { return psi0_finite(s, 1.0, 4.0, H); };

    auto kp = kernel_predictor_mse(g, 1.0, H, kern, &ens);
    REQUIRE(kp.mse_empirical.has_value());
    const double band =
        3.0 * kp.mse_theoretical * std::sqrt(2.0 / paths);
    CHECK(std::abs(*kp.mse_empirical - kp.mse_theoretical) <= band);

    SECTION("ensemble shape is checked against the grid") {
        auto small = make_midpoint_grid(-4.0, 0.0, 8);
        CHECK_THROWS_AS(kernel_predictor_mse(small, 1.0, H, kern, &ens),
                        validation_error);
        auto empty = simulate_paths(small, 1.0, H, 0, 1);
        CHECK_THROWS_AS(kernel_predictor_mse(small, 1.0, H, kern, &empty),
                        validation_error);
    }
}

TEST_CASE("interior weight distance excludes the endpoint cells") {
    Eigen::VectorXd w(6), ref(6);
    w << 1, 2, 3, 4, 5, 6;
    ref << 1, 2, 4, 5, 5, 6;
    // interior slice holds indices 2 and 3: diff norm sqrt(2), ref norm
    // sqrt(41)
    CHECK(std::abs(interior_weight_distance(w, ref) -
                   std::sqrt(2.0 / 41.0)) < 1e-15);

    Eigen::VectorXd short4(4);
    short4 << 1, 2, 3, 4;
    CHECK_THROWS_AS(interior_weight_distance(short4, short4),
                    validation_error);
    CHECK_THROWS_AS(interior_weight_distance(w, short4), validation_error);
}
