#pragma once

// Monte Carlo ground truth for the finite-past predictor: exact Gaussian
// sampling of the process on a grid via dense covariance factorization, the
// grid-optimal predictor from the Gram system, and the discretized-kernel
// predictor it is compared against. Dense LLT over circulant tricks: grids
// are small, exactness matters, and non-uniform grids stay supported.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "special_functions.hpp"

namespace fbmbax {

// Covariance of the unit-normalized process: symmetric, zero at the origin,
// variance |s|^{2H}.
inline double fbm_cov(double s, double u, hurst_index hurst) {
    const double two_h = 2.0 * static_cast<double>(hurst);
    return 0.5 * (std::pow(std::abs(s), two_h) + std::pow(std::abs(u), two_h) -
                  std::pow(std::abs(s - u), two_h));
}

// Midpoints of n uniform cells over [t0, t1]. Midpoints keep every kernel
// evaluation away from the window endpoints where the kernel diverges.
struct sample_grid {
    std::vector<double> points;
    double t0, t1, ds;
};

inline sample_grid make_midpoint_grid(double t0, double t1, int n) {
    if (!(t1 > t0))
        throw validation_error("make_midpoint_grid: requires t0 < t1");
    if (n < 1) throw validation_error("make_midpoint_grid: requires n >= 1");
    sample_grid g;
    g.t0 = t0;
    g.t1 = t1;
    g.ds = (t1 - t0) / n;
    g.points.reserve(n);
    for (int i = 0; i < n; ++i) g.points.push_back(t0 + (i + 0.5) * g.ds);
    return g;
}

struct path_ensemble {
    // n_paths x (n+1); the last column is the target time t2
    Eigen::MatrixXd values;
    std::vector<double> times; // grid points then t2
    double hurst;
    double t2;
    std::uint64_t seed;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Box-Muller over explicit 53-bit uniforms: identical output on every
// platform, unlike std::normal_distribution.
struct normal_stream {
    std::mt19937_64 eng;
    bool have_spare = false;
    double spare = 0.0;

    explicit normal_stream(std::uint64_t seed) : eng(seed) {}

    double uniform_open() { // (0, 1]
        return ((eng() >> 11) + 1.0) * 0x1p-53;
    }
    double next() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double a = 2.0 * std::numbers::pi * uniform_open();
        spare = r * std::sin(a);
        have_spare = true;
        return r * std::cos(a);
    }
};

inline Eigen::MatrixXd covariance_matrix(const std::vector<double>& times,
                                         hurst_index hurst) {
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            cov(i, j) = fbm_cov(times[i], times[j], hurst);
            cov(j, i) = cov(i, j);
        }
    return cov;
}

inline void check_grid(const sample_grid& grid) {
    if (grid.points.empty())
        throw validation_error("sample grid: must contain points");
    double prev = -std::numeric_limits<double>::infinity();
    for (double p : grid.points) {
        if (!(p > prev))
            throw validation_error("sample grid: points must strictly increase");
        prev = p;
    }
}

} // namespace detail

// Exact Gaussian samples at the grid points plus the target time. Paths are
// generated in fixed-size blocks whose generators derive deterministically
// from the master seed, so the ensemble does not depend on how the work is
// partitioned.
inline path_ensemble simulate_paths(const sample_grid& grid, double t2,
                                    hurst_index hurst, int n_paths,
                                    std::uint64_t seed) {
    detail::check_grid(grid);
    if (n_paths < 0)
        throw validation_error("simulate_paths: requires n_paths >= 0");
    for (double p : grid.points)
        if (p == t2)
            throw validation_error(
                "simulate_paths: target time coincides with a grid point, "
                "covariance is singular");
    std::vector<double> times = grid.points;
    times.push_back(t2);
    const auto dim = static_cast<Eigen::Index>(times.size());

    path_ensemble out;
    out.times = times;
    out.hurst = hurst;
    out.t2 = t2;
    out.seed = seed;
    out.values.resize(n_paths, dim);
    if (n_paths == 0) return out;

    Eigen::LLT<Eigen::MatrixXd> llt(detail::covariance_matrix(times, hurst));
    if (llt.info() != Eigen::Success)
        throw non_convergence_error(
            "simulate_paths: covariance factorization failed (coincident "
            "sample times?)",
            0.0, 0.0);
    const Eigen::MatrixXd L = llt.matrixL();

    constexpr int block = 256;
    Eigen::VectorXd z(dim);
    for (int p0 = 0; p0 < n_paths; p0 += block) {
        detail::normal_stream rng(
            detail::splitmix64(seed ^ (0x9e3779b97f4a7c15ull *
                                       (static_cast<std::uint64_t>(p0 / block) +
                                        1))));
        const int hi = std::min(n_paths, p0 + block);
        for (int p = p0; p < hi; ++p) {
            for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.next();
            out.values.row(p) = (L * z).transpose();
        }
    }
    return out;
}

struct gram_predictor {
    Eigen::VectorXd weights;
    double mse;   // Var X(t2) - w . cross
    double rcond; // reciprocal condition estimate of the Gram matrix
};

// Optimal linear predictor of X(t2) from the grid values: Gram * w = cross.
inline gram_predictor gram_optimal_predictor(const sample_grid& grid,
                                             double t2, hurst_index hurst) {
    detail::check_grid(grid);
    const auto n = static_cast<Eigen::Index>(grid.points.size());
    const Eigen::MatrixXd gram =
        detail::covariance_matrix(grid.points, hurst);
    Eigen::VectorXd cross(n);
    for (Eigen::Index i = 0; i < n; ++i)
        cross(i) = fbm_cov(grid.points[i], t2, hurst);

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw non_convergence_error(
            "gram_optimal_predictor: Gram factorization failed (coincident "
            "grid points?)",
            0.0, 0.0);
    const double rcond = llt.rcond();
    if (!(rcond > 1e-14)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "gram_optimal_predictor: Gram matrix too "
                      "ill-conditioned (reciprocal condition %.3e)",
                      rcond);
        throw non_convergence_error(buf, 0.0, rcond);
    }

    gram_predictor out;
    out.weights = llt.solve(cross);
    // one refinement pass keeps the normal-equation residual near machine
    // precision even when the Gram matrix is moderately conditioned
    out.weights += llt.solve(cross - gram * out.weights);
    out.mse = fbm_cov(t2, t2, hurst) - out.weights.dot(cross);
    out.rcond = rcond;
    if (out.mse < 0.0 && out.mse > -1e-12) out.mse = 0.0; // exact-solve noise
    return out;
}

// Weights of the discretized kernel predictor: w_i = kernel(t1 - s_i) ds.
// kernel is the finite-past density on the open window (0, t1 - t0).
inline Eigen::VectorXd
kernel_weights(const sample_grid& grid,
               const std::function<double(double)>& kernel) {
    detail::check_grid(grid);
    const auto n = static_cast<Eigen::Index>(grid.points.size());
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w(i) = kernel(grid.t1 - grid.points[i]) * grid.ds;
    return w;
}

struct kernel_predictor_result {
    Eigen::VectorXd weights;
    double mse_theoretical; // exact Gaussian quadratic form
    std::optional<double> mse_empirical;
};

// MSE of the fixed-weight predictor sum w_i X(s_i): exact quadratic form,
// plus the ensemble average when an ensemble is supplied.
inline kernel_predictor_result
kernel_predictor_mse(const sample_grid& grid, double t2, hurst_index hurst,
                     const std::function<double(double)>& kernel,
                     const path_ensemble* ensemble = nullptr) {
    const Eigen::VectorXd w = kernel_weights(grid, kernel);
    const auto n = static_cast<Eigen::Index>(grid.points.size());
    const Eigen::MatrixXd gram =
        detail::covariance_matrix(grid.points, hurst);
    Eigen::VectorXd cross(n);
    for (Eigen::Index i = 0; i < n; ++i)
        cross(i) = fbm_cov(grid.points[i], t2, hurst);

    kernel_predictor_result out;
    out.weights = w;
    out.mse_theoretical = fbm_cov(t2, t2, hurst) - 2.0 * w.dot(cross) +
                          w.dot(gram * w);
    if (ensemble) {
        if (ensemble->values.cols() != n + 1)
            throw validation_error(
                "kernel_predictor_mse: ensemble does not match the grid");
        const auto paths = ensemble->values.rows();
        if (paths == 0)
            throw validation_error(
                "kernel_predictor_mse: ensemble holds no paths");
        const Eigen::VectorXd pred =
            ensemble->values.leftCols(n) * w;
        const Eigen::VectorXd resid =
            pred - ensemble->values.col(n);
        out.mse_empirical = resid.squaredNorm() / static_cast<double>(paths);
    }
    return out;
}

// l2-relative distance between two weight vectors over interior entries,
// excluding the 2 cells nearest each endpoint where discretization error
// dominates.
inline double interior_weight_distance(const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& w_ref) {
    if (w.size() != w_ref.size())
        throw validation_error(
            "interior_weight_distance: size mismatch");
    if (w.size() < 5)
        throw validation_error(
            "interior_weight_distance: needs at least 5 weights");
    const auto n = w.size();
    const auto len = n - 4;
    const Eigen::VectorXd diff =
        w.segment(2, len) - w_ref.segment(2, len);
    return diff.norm() / w_ref.segment(2, len).norm();
}

} // namespace fbmbax
