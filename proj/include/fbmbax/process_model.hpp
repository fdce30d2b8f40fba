#pragma once

// General fBm-type process machinery: moving-average coefficient c,
// autoregressive coefficient a, the base kernel b(s,u), the resolvent-like
// kernels beta and delta_k, the iterated kernels b_k, and the kernel series
// for the finite-past predictor.
//
// Everything is generic over the model; the built-in fBm model supplies
// closed forms for c, a, beta and the base kernel, which the tests verify
// against the quadrature routes before the series machinery relies on them.

#include <cmath>
#include <deque>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fbm_kernels.hpp"
#include "interpolation.hpp"
#include "quadrature.hpp"
#include "special_functions.hpp"

namespace fbmbax {

// c(t): positive, decreasing, ~ (1/Gamma(1/2+H)) t^{-(1/2-H)} ell(t) at
// infinity, with an integrable algebraic singularity at 0+.
struct moving_avg_coefficient {
    std::function<double(double)> eval;
    double singularity_order; // c(t) ~ t^q as t -> 0+, q > -1/2
    double ell = 1.0;         // slowly varying factor; constant in this version
};

// a(t): positive, decreasing, a(t) ~ (1/2+H)/Gamma(1/2-H) t^{-(3/2+H)}/ell(t).
struct autoregressive_coefficient {
    std::function<double(double)> eval;
    double tail_exponent; // a(t) ~ t^{-tail_exponent}, equals 3/2 + H
};

struct process_model {
    hurst_index H;
    moving_avg_coefficient c;
    autoregressive_coefficient a;
    // Optional analytic fast paths; when absent the quadrature definitions
    // are used directly.
    std::function<double(double)> beta_closed;
    std::function<double(double, double)> b_closed; // b(s, u)
    std::string name;
};

inline process_model make_fbm_model(hurst_index hurst) {
    const double h = hurst;
    const double c0 = 1.0 / gamma_fn(0.5 + h);
    const double a0 = (0.5 + h) / gamma_fn(0.5 - h);
    const double cospi = std::cos(std::numbers::pi * h) / std::numbers::pi;
    process_model m{
        hurst,
        {[=](double t) { return c0 * std::pow(t, -(0.5 - h)); }, -(0.5 - h),
         1.0},
        {[=](double t) { return a0 * std::pow(t, -(1.5 + h)); }, 1.5 + h},
        [=](double t) { return cospi / t; },
        [=](double s, double u) {
            return cospi * std::pow(u / s, 0.5 + h) / (s + u);
        },
        "fbm"};
    return m;
}

// ---------------------------------------------------------------------------
// Generating measure nu: c(t) = int_0^inf e^{-ts} nu(ds).

struct nu_atom {
    double weight;
    double rate;
};

struct nu_measure {
    std::function<double(double)> density; // may be empty
    double density_singularity = 0.0;      // density ~ s^e at 0+, needs e > -1
    double density_tail = 2.0;             // density decays like s^{-p}, p > 0
    std::vector<nu_atom> atoms;
};

// Laplace transform of nu at t. The integrability conditions are those of
// int (1+s)^{-1} nu(ds) < inf, declared through the exponents above.
inline double c_from_nu(const nu_measure& nu, double t,
                        const quad_control& ctl = {}) {
    if (!(t > 0.0)) throw validation_error("c_from_nu: requires t > 0");
    if (nu.density && !(nu.density_singularity > -1.0))
        throw validation_error(
            "c_from_nu: density exponent at 0 must be > -1 (non-integrable nu)");
    if (nu.density && !(nu.density_tail > 0.0))
        throw validation_error(
            "c_from_nu: density must decay at infinity (non-integrable nu)");
    double value = 0.0;
    for (const auto& atom : nu.atoms) {
        if (!(atom.weight >= 0.0) || !(atom.rate >= 0.0))
            throw validation_error("c_from_nu: atoms need weight, rate >= 0");
        value += atom.weight * std::exp(-atom.rate * t);
    }
    if (nu.density) {
        auto f = [&](double s, double dl, double) {
            return std::exp(-t * s) * nu.density(dl);
        };
        value += integrate_upper(f, 0.0, nu.density_singularity,
                                 tail_decay{nu.density_tail + 2.0}, ctl,
                                 "c_from_nu", 1.0 + 1.0 / t)
                     .value;
    }
    return value;
}

// ---------------------------------------------------------------------------
// Base kernel and resolvent kernels.

// b(s, u) = int_0^u c(u-v) a(s+v) dv. The c-singularity sits at v = u and is
// declared; c receives the exact right offset.
inline double b_kernel(const process_model& m, double s, double u,
                       const quad_control& ctl = {}) {
    if (!(s > 0.0)) throw validation_error("b_kernel: requires s > 0");
    if (!(u > 0.0)) throw validation_error("b_kernel: requires u > 0");
    auto f = [&](double, double dl, double dr) {
        return m.c.eval(dr) * m.a.eval(s + dl);
    };
    return integrate_finite(f, 0.0, u, {0.0, m.c.singularity_order}, ctl,
                            "b_kernel")
        .value;
}

// beta(t) = int_0^inf c(v) a(t+v) dv; the combined tail decays like
// v^{singularity_decay + tail}, which is v^{-2} for the fBm family.
inline double beta_kernel(const process_model& m, double t,
                          const quad_control& ctl = {}) {
    if (!(t > 0.0)) throw validation_error("beta_kernel: requires t > 0");
    auto f = [&](double, double dl, double) {
        return m.c.eval(dl) * m.a.eval(t + dl);
    };
    const double tail_p = m.a.tail_exponent - (-m.c.singularity_order);
    return integrate_upper(f, 0.0, m.c.singularity_order, tail_decay{tail_p},
                           ctl, "beta_kernel", std::max(1.0, t))
        .value;
}

namespace detail {

inline double beta_eval(const process_model& m, double t,
                        const quad_control& ctl) {
    return m.beta_closed ? m.beta_closed(t) : beta_kernel(m, t, ctl);
}

} // namespace detail

// delta_1(t,u,v) = beta(t+u+v); delta_k(t,u,v) = int_0^inf beta(t+v+w)
// delta_{k-1}(t,u,w) dw. Nesting multiplies quadrature cost per level, so
// the direct evaluation is capped; the series machinery never needs deep
// delta_k, only the cross-checks do.
inline constexpr int delta_depth_cap = 6;

inline double delta_k(const process_model& m, int k, double t, double u,
                      double v, const quad_control& ctl = {}) {
    if (k < 1) throw validation_error("delta_k: requires k >= 1");
    if (k > delta_depth_cap)
        throw validation_error(
            "delta_k: k exceeds the nested-quadrature depth cap (6)");
    if (!(t > 0.0 && u > 0.0 && v > 0.0))
        throw validation_error("delta_k: requires t, u, v > 0");
    if (k == 1) return detail::beta_eval(m, t + u + v, ctl);
    auto f = [&](double w, double, double) {
        return detail::beta_eval(m, t + v + w, ctl) *
               delta_k(m, k - 1, t, u, w, ctl);
    };
    return integrate_upper(f, 0.0, 0.0, tail_decay{2.0}, ctl, "delta_k",
                           t + v)
        .value;
}

// ---------------------------------------------------------------------------
// Iterated kernels and the finite-past kernel series.

struct kernel_series_config {
    int k_max = 32;    // highest b-index the chain may consume
    double tol = 1e-6; // relative truncation target for the certified bound
    // Growth allowance in the term majorant, x = r cos(piH); must lie in
    // (1, 1/cos(piH)). The 0 sentinel picks the midpoint of that window,
    // which adapts to H (a fixed value could not: the window shrinks to 1
    // as H -> 0).
    double r = 0.0;
    double contraction_cap = 0.95; // max admissible pair ratio in the bound
};

struct series_value {
    double value;
    double truncation_bound;
    int terms_used; // number of b-indices consumed
};

namespace detail {

// Shared driver for the pair sums. next_term(kpair) yields the kpair-th
// positive pair (or nothing once the index budget is exhausted) together
// with the highest b-index it consumed. Observed pair ratios approach
// cos^2(piH) from below (one factor cos(piH) per b-index), so the tail
// estimate floors the observed ratio at that limit; otherwise an early stop
// during the rising-ratio phase would underestimate the tail. The estimate
// keeps a factor-2 safety margin on top. The analytic per-term majorant
// cannot certify the whole tail (its sum over k diverges), so the observed
// contraction is the honest certificate; when it fails, so does the
// evaluation.
template <class F>
series_value certify_pair_sum(F&& next_term, double hurst,
                              const kernel_series_config& cfg) {
    const double cospi = std::cos(std::numbers::pi * hurst);
    const double r_floor = cospi * cospi;
    if (!(r_floor < cfg.contraction_cap))
        throw non_convergence_error(
            "kernel series: contraction limit cos^2(piH) exceeds the "
            "certification cap at this Hurst index",
            0.0, 0.0);
    double sum = 0.0;
    std::vector<double> pairs;
    int used = 0;
    double last_bound = 0.0;
    for (int kpair = 1;; ++kpair) {
        auto produced = next_term(kpair);
        if (!produced) break;
        const double term = produced->first;
        used = produced->second;
        sum += term;
        pairs.push_back(term);
        if (pairs.size() < 2) continue;
        if (sum == 0.0) return {0.0, 0.0, used}; // identically zero weight
        double r_obs = r_floor;
        const std::size_t n = pairs.size();
        for (std::size_t i = (n >= 4 ? n - 3 : 1); i < n; ++i)
            r_obs = std::max(r_obs, pairs[i] / pairs[i - 1]);
        if (!(r_obs < cfg.contraction_cap)) continue;
        last_bound = 2.0 * term * r_obs / (1.0 - r_obs);
        if (last_bound < cfg.tol * sum) return {sum, last_bound, used};
    }
    throw non_convergence_error(
        "kernel series: k_max reached before the truncation target", sum,
        last_bound > 0.0 ? last_bound : (pairs.empty() ? 0.0 : pairs.back()));
}

} // namespace detail

// Per-term majorant for the iterated kernels at large t:
//   b_k(s;T,t) <= [int_0^T c] [int_s^inf a] f_{k-1}(0) x^{k-1} / t,
// with x = r cos(piH) < 1. Valid once t is beyond the (model-dependent,
// empirically checked) threshold where the delta_k inequality holds. Note
// f_{k-1}(0) grows factorially, so the sum of these majorants over all k
// diverges: the majorant rules individual terms, never the whole tail.
inline double series_term_majorant(const process_model& m, int k, double s,
                                   double T, double t, double r,
                                   const quad_control& ctl = {}) {
    if (k < 2) throw validation_error("series_term_majorant: requires k >= 2");
    const double h = m.H;
    const double x = r * std::cos(std::numbers::pi * h);
    if (!(r > 1.0) || !(x < 1.0))
        throw validation_error(
            "series_term_majorant: r must satisfy 1 < r < 1/cos(piH)");
    auto cf = [&](double, double dl, double) { return m.c.eval(dl); };
    const double c_mass =
        integrate_finite(cf, 0.0, T, {m.c.singularity_order, 0.0}, ctl,
                         "series_term_majorant")
            .value;
    auto af = [&](double w, double, double) { return m.a.eval(w); };
    const double a_mass = integrate_upper(af, s, 0.0,
                                          tail_decay{m.a.tail_exponent}, ctl,
                                          "series_term_majorant", 2.0 * s)
                              .value;
    return c_mass * a_mass * f_k(k - 1, 0.0) * std::pow(x, k - 1.0) / t;
}

// Memoized chain of iterated kernels for fixed geometry (T, t):
//   b_1(sigma) = b(sigma, T),
//   b_k(sigma) = int_0^inf b(sigma, u) b_{k-1}(t + u) du.
// Each level is tabulated on sigma in [t, 10^12 t] (log-log Chebyshev, with
// the analytic power tail sigma^{-(3/2+H)} beyond) because the recursion only
// ever consumes previous levels at sigma >= t. Queries below t go through the
// outer integral directly.
class kernel_series {
public:
    kernel_series(const process_model& m, double T, double t,
                  kernel_series_config cfg = {})
        : m_(m), T_(T), t_(t), cfg_(cfg) {
        if (!(T > 0.0)) throw validation_error("kernel_series: requires T > 0");
        if (!(t > 0.0)) throw validation_error("kernel_series: requires t > 0");
        if (cfg.k_max < 2 || cfg.k_max > 64)
            throw validation_error("kernel_series: k_max must lie in [2, 64]");
        const double cospi = std::cos(std::numbers::pi * m.H);
        if (cfg_.r == 0.0) cfg_.r = 0.5 * (1.0 + 1.0 / cospi);
        if (!(cfg_.r > 1.0) || !(cfg_.r * cospi < 1.0))
            throw validation_error(
                "kernel_series: r must satisfy 1 < r < 1/cos(piH)");
        z_lo_ = std::log(t_);
        z_hi_ = std::log(t_) + decades_ * std::log(10.0);
    }

    double horizon() const { return T_; }
    double window() const { return t_; }

    // Direct evaluation of b_k at any sigma > 0.
    double b_k(int k, double sigma) {
        if (k < 1) throw validation_error("kernel_series: requires k >= 1");
        if (k > cfg_.k_max)
            throw validation_error("kernel_series: k exceeds configured k_max");
        if (!(sigma > 0.0))
            throw validation_error("kernel_series: requires sigma > 0");
        if (k == 1) return base_b(sigma, T_);
        ensure_level(k - 1);
        return outer_integral(k, sigma);
    }

    // psi(s; T, t) = sum_k [b_{2k-1}(s) + b_{2k}(t-s)].
    series_value psi(double s) { return accumulate(s, false); }

    // psi(s; T, t) - psi(s; T) = sum_k [b_{2k}(t-s) + b_{2k+1}(s)].
    series_value diff(double s) { return accumulate(s, true); }

private:
    static constexpr int decades_ = 12;
    static constexpr int nodes_ = 200;

    double base_b(double s, double u) const {
        return m_.b_closed ? m_.b_closed(s, u)
                           : b_kernel(m_, s, u, inner_ctl());
    }

    quad_control inner_ctl() const { return {1e-9, 0.0, 200000}; }

    // Level j holds b_j on the chain domain; levels never change once built.
    double level_eval(int j, double sigma) const {
        if (j == 1) return base_b(sigma, T_);
        const chebyshev_interpolant& lvl = levels_[j - 2];
        const double z = std::log(sigma);
        if (z <= z_hi_) return std::exp(lvl(z));
        // analytic power tail, exponent -(3/2+H)
        return std::exp(lvl(z_hi_) - m_.a.tail_exponent * (z - z_hi_));
    }

    double outer_integral(int k, double sigma) const {
        // b(sigma, u) vanishes like u^{1 + q} at u = 0 (q the c-singularity
        // order) and the product decays like u^{-2}.
        auto f = [&](double, double dl, double) {
            return base_b(sigma, dl) * level_eval(k - 1, t_ + dl);
        };
        return integrate_upper(f, 0.0, 1.0 + m_.c.singularity_order,
                               tail_decay{2.0}, inner_ctl(), "kernel_series",
                               std::max(sigma, t_))
            .value;
    }

    void ensure_level(int j_top) {
        while (static_cast<int>(levels_.size()) + 1 < j_top) {
            const int j = static_cast<int>(levels_.size()) + 2;
            levels_.push_back(chebyshev_interpolant::build(
                [&](double z) {
                    return std::log(outer_integral(j, std::exp(z)));
                },
                z_lo_, z_hi_, nodes_));
        }
    }

    series_value accumulate(double s, bool diff_series) {
        if (!(s > 0.0 && s < t_))
            throw validation_error("kernel_series: requires 0 < s < t");
        const double t_minus_s = t_ - s;
        auto next = [&](int kpair) -> std::optional<std::pair<double, int>> {
            if (diff_series) {
                if (2 * kpair + 1 > cfg_.k_max) return std::nullopt;
                return std::pair{b_k(2 * kpair, t_minus_s) +
                                     b_k(2 * kpair + 1, s),
                                 2 * kpair + 1};
            }
            if (2 * kpair > cfg_.k_max) return std::nullopt;
            return std::pair{b_k(2 * kpair - 1, s) + b_k(2 * kpair, t_minus_s),
                             2 * kpair};
        };
        return detail::certify_pair_sum(next, m_.H, cfg_);
    }

    const process_model m_;
    double T_, t_;
    kernel_series_config cfg_;
    double z_lo_, z_hi_;
    std::deque<chebyshev_interpolant> levels_;
};

// Direct-recursion value of b_k(s; T, t) through the memoized chain.
inline double b_k_iterated(const process_model& m, int k, double s, double T,
                           double t, kernel_series_config cfg = {}) {
    kernel_series chain(m, T, t, cfg);
    return chain.b_k(k, s);
}

// Independent route for b_k (k >= 2):
//   b_k(s;T,t) = int_0^T c(T-v) int_0^inf a(s+u) delta_{k-1}(t,u,v) du dv.
// Shares no structure with the chain above except the model coefficients.
inline double b_k_via_delta(const process_model& m, int k, double s, double T,
                         double t, const quad_control& ctl = {1e-8, 0.0,
                                                              200000}) {
    if (k < 2) throw validation_error("b_k_via_delta: requires k >= 2");
    if (k - 1 > delta_depth_cap)
        throw validation_error("b_k_via_delta: k exceeds the delta depth cap");
    if (!(s > 0.0 && T > 0.0 && t > 0.0))
        throw validation_error("b_k_via_delta: requires s, T, t > 0");
    auto inner = [&](double v) {
        auto g = [&](double u, double, double) {
            return m.a.eval(s + u) * delta_k(m, k - 1, t, u, v, ctl);
        };
        return integrate_upper(g, 0.0, 0.0,
                               tail_decay{m.a.tail_exponent + 1.0}, ctl,
                               "b_k_via_delta", std::max(s, t))
            .value;
    };
    auto f = [&](double, double dl, double dr) {
        return m.c.eval(dr) * inner(dl);
    };
    return integrate_finite(f, 0.0, T, {0.0, m.c.singularity_order}, ctl,
                            "b_k_via_delta")
        .value;
}

// Convenience wrappers matching the series operations.
inline series_value psi_finite_series(const process_model& m, double s,
                                      double T, double t,
                                      kernel_series_config cfg = {}) {
    kernel_series chain(m, T, t, cfg);
    return chain.psi(s);
}

inline series_value psi_diff_series(const process_model& m, double s, double T,
                                    double t, kernel_series_config cfg = {}) {
    kernel_series chain(m, T, t, cfg);
    return chain.diff(s);
}

} // namespace fbmbax
