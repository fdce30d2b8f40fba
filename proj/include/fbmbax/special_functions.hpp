#pragma once

// Gamma/beta plumbing, the prediction-constant C(H, rho), and the f_k
// family used by the series remainder analysis.
//
// f_1(u) = 1/(pi (1+u)),  f_k(u) = int_0^inf f_{k-1}(u+v) / (pi (1+v)) dv.
//
// f_k(0) grows factorially in k (0.318, 0.101, 0.053, 0.043, 0.050, 0.075,
// 0.139, ...), so sum_k f_k(0) x^k diverges for every x > 0; there is no
// geometric majorant. f_series_bound therefore reports the finite partial
// sum over the cached table and nothing more.

#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "interpolation.hpp"
#include "quadrature.hpp"

namespace fbmbax {

// Hurst index restricted to the antipersistent window (0, 1/2); every kernel
// formula in this library is specific to that window.
class hurst_index {
public:
    explicit hurst_index(double h) : h_(h) {
        if (!(h > 0.0 && h < 0.5))
            throw validation_error(
                "hurst_index: H must lie strictly inside (0, 1/2)");
    }
    operator double() const { return h_; }
    double value() const { return h_; }

private:
    double h_;
};

inline double gamma_fn(double x) {
    if (x <= 0.0 && x == std::floor(x))
        throw validation_error("gamma_fn: pole at nonpositive integers");
    return std::tgamma(x);
}

inline double beta_fn(double a, double b) {
    if (!(a > 0.0 && b > 0.0))
        throw validation_error("beta_fn: requires positive arguments");
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

// Lower incomplete beta B_x(a, b) = int_0^x u^{a-1} (1-u)^{b-1} du, not
// regularized. Evaluated by the adaptive engine with the u^{a-1} endpoint
// declared; 1-u is reconstructed from the exact right offset so x near 1
// stays accurate.
inline double incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0))
        throw validation_error("incomplete_beta: requires positive parameters");
    if (!(x >= 0.0 && x <= 1.0))
        throw validation_error("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return beta_fn(a, b);
    const double one_minus_x = 1.0 - x;
    auto f = [&](double u, double dl, double dr) {
        const double omu = one_minus_x + dr;  // 1-u without cancellation
        (void)u;
        return std::pow(dl, a - 1.0) * std::pow(omu, b - 1.0);
    };
    return integrate_finite(f, 0.0, x, {a - 1.0, 0.0},
                            quad_control{1e-12, 0.0, 200000},
                            "incomplete_beta")
        .value;
}

// C(H, rho) = 1 - rho B(1/2-H+rho, 1/2-H) (1-2H)/(1+2H), the limit constant
// of the prediction-ratio sweeps. Defined for rho in (-1/2+H, 1/2+H).
inline double baxter_constant(hurst_index hurst, double rho) {
    const double h = hurst;
    if (!(rho > -0.5 + h && rho < 0.5 + h))
        throw validation_error(
            "baxter_constant: rho must lie in (-1/2+H, 1/2+H)");
    if (rho == 0.0) return 1.0;
    return 1.0 -
           rho * beta_fn(0.5 - h + rho, 0.5 - h) * (1.0 - 2.0 * h) /
               (1.0 + 2.0 * h);
}

namespace detail {

// Lazy chain of f_k interpolants for k >= 3, each stored in z = log1p(u) on
// u in [0, U_MAX] with the calibrated slow tail
//   f_k(u) ~ f_k(U) ((1+U)/(1+u)) (log1p(u)/log1p(U))^{k-1}
// beyond. Levels never change once built, so reads after ensure() are safe
// under the same mutex that serialized the build.
class f_chain {
public:
    static constexpr int k_table = 16;
    static constexpr double u_max = 1e9;

    static f_chain& instance() {
        static f_chain chain;
        return chain;
    }

    double eval(int k, double u) {
        std::lock_guard<std::mutex> lock(mu_);
        ensure(k);
        return eval_nolock(k, u);
    }

    double at_zero(int k) {
        std::lock_guard<std::mutex> lock(mu_);
        ensure(k);
        return eval_nolock(k, 0.0);
    }

private:
    f_chain() = default;

    static double f1(double u) { return 1.0 / (std::numbers::pi * (1.0 + u)); }
    static double f2(double u) {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        return u == 0.0 ? 1.0 / pi2 : std::log1p(u) / (pi2 * u);
    }

    double eval_nolock(int k, double u) const {
        if (k == 1) return f1(u);
        if (k == 2) return f2(u);
        const chebyshev_interpolant& lvl = levels_[k - 3];
        const double z = std::log1p(u);
        if (z <= z_max_) return lvl(z);
        const double edge = lvl(z_max_);
        return edge * ((1.0 + u_max) / (1.0 + u)) *
               std::pow(z / z_max_, k - 1.0);
    }

    double recurse_nolock(int k, double u) const {
        auto f = [&](double v, double, double) {
            return eval_nolock(k - 1, u + v) /
                   (std::numbers::pi * (1.0 + v));
        };
        const double split = std::max(10.0, u);
        return integrate_upper(f, 0.0, 0.0, tail_decay{1.9},
                               quad_control{1e-10, 0.0, 200000}, "f_k chain",
                               split)
            .value;
    }

    void ensure(int k) {
        if (k < 1 || k > k_table)
            throw validation_error("f_k: k must lie in [1, 16]; higher orders "
                                   "are not tabulated");
        while (static_cast<int>(levels_.size()) + 2 < k) {
            const int next = static_cast<int>(levels_.size()) + 3;
            levels_.push_back(chebyshev_interpolant::build(
                [&](double z) { return recurse_nolock(next, std::expm1(z)); },
                0.0, z_max_, 128));
        }
    }

    std::mutex mu_;
    std::deque<chebyshev_interpolant> levels_;
    double z_max_ = std::log1p(u_max);
};

} // namespace detail

// f_k via the cached interpolant chain (closed forms for k <= 2).
inline double f_k(int k, double u) {
    if (!(u >= 0.0)) throw validation_error("f_k: u must be >= 0");
    return detail::f_chain::instance().eval(k, u);
}

// One explicit quadrature step of the recursion on top of level k-1. This is
// the validation route: for k = 2 it integrates the closed-form f_1, so it
// shares nothing with the closed-form f_2 it is checked against.
inline double f_k_by_recursion(int k, double u) {
    if (k < 2) throw validation_error("f_k_by_recursion: k must be >= 2");
    if (!(u >= 0.0)) throw validation_error("f_k_by_recursion: u must be >= 0");
    auto f = [&](double v, double, double) {
        return f_k(k - 1, u + v) / (std::numbers::pi * (1.0 + v));
    };
    const double split = std::max(10.0, u);
    return integrate_upper(f, 0.0, 0.0, tail_decay{1.9},
                           quad_control{1e-11, 0.0, 200000},
                           "f_k_by_recursion", split)
        .value;
}

// Partial sum sum_{k = k_from}^{16} f_k(0) x^k over the cached table. The
// infinite series has no finite majorant (f_k(0) grows factorially), so this
// is a diagnostic partial sum, not a remainder bound for the full series.
inline double f_series_bound(double x, int k_from) {
    if (!(x > 0.0 && x < 1.0))
        throw validation_error("f_series_bound: x must lie in (0, 1)");
    if (k_from < 1)
        throw validation_error("f_series_bound: k_from must be >= 1");
    auto& chain = detail::f_chain::instance();
    double sum = 0.0;
    for (int k = detail::f_chain::k_table; k >= k_from; --k)
        sum += chain.at_zero(k) * std::pow(x, k);
    return sum;
}

} // namespace fbmbax
