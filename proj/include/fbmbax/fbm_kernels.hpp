#pragma once

// Closed-form prediction kernels for fractional-Brownian-motion-type
// processes with Hurst index H in (0, 1/2).
//
// psi0(s; T) is the infinite-past kernel weighting the observation at lag s
// when predicting T ahead; psi0(s; T, t) is its finite-past counterpart when
// only the last t units are observed. Both integrate to exactly 1 over their
// domain, which the tests exploit as an oracle.
//
// Quadrature-facing evaluators take t - s as a separate argument so callers
// integrating up to s = t can supply the exact offset; forming t - s from a
// rounded s loses the entire fine structure of the s -> t endpoint.

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "quadrature.hpp"
#include "special_functions.hpp"

namespace fbmbax {

inline double psi0_infinite(double s, double T, hurst_index hurst) {
    if (!(s > 0.0)) throw validation_error("psi0_infinite: requires s > 0");
    if (!(T > 0.0)) throw validation_error("psi0_infinite: requires T > 0");
    const double h = hurst;
    return std::cos(std::numbers::pi * h) / std::numbers::pi *
           std::pow(T / s, 0.5 + h) / (s + T);
}

// Finite-past kernel for fixed geometry (T, t). The incomplete beta factor
// B_{T/(t+T)}(H+1/2, 1-2H) depends only on the geometry and is hoisted here;
// evaluating it per point would dominate every integral over the kernel.
class finite_past_kernel {
public:
    finite_past_kernel(double T, double t, hurst_index hurst)
        : T_(T), t_(t), h_(hurst) {
        if (!(T > 0.0))
            throw validation_error("finite_past_kernel: requires T > 0");
        if (!(t > 0.0))
            throw validation_error("finite_past_kernel: requires t > 0");
        cospi_ = std::cos(std::numbers::pi * h_) / std::numbers::pi;
        ib_ = incomplete_beta(T / (t + T), h_ + 0.5, 1.0 - 2.0 * h_);
    }

    double horizon() const { return T_; }
    double window() const { return t_; }
    double hurst() const { return h_; }

    double infinite(double s) const {
        return cospi_ * std::pow(T_ / s, 0.5 + h_) / (s + T_);
    }

    // psi0(s; T, t) with t - s supplied exactly by the caller.
    double value(double s, double t_minus_s) const {
        const double a = 0.5 + h_;
        const double term1 = (1.0 / (s + T_)) * std::pow(T_ / s, a) *
                             std::pow(t_minus_s / (t_ + T_), 0.5 - h_);
        const double term2 = (0.5 - h_) * ib_ * (1.0 / t_) *
                             std::pow((t_ / s) * (t_ / t_minus_s), a);
        return cospi_ * (term1 + term2);
    }

    // psi0(s; T, t) - psi0(s; T), evaluated without cancellation: the
    // difference of the leading terms collapses to expm1 of an exact log.
    double diff(double s, double t_minus_s) const {
        const double shrink =
            std::expm1((0.5 - h_) * std::log(t_minus_s / (t_ + T_)));
        const double term2 = (0.5 - h_) * ib_ * (1.0 / t_) *
                             std::pow((t_ / s) * (t_ / t_minus_s), 0.5 + h_);
        return infinite(s) * shrink + cospi_ * term2;
    }

private:
    double T_, t_, h_;
    double cospi_;
    double ib_;
};

inline double psi0_finite(double s, double T, double t, hurst_index hurst) {
    if (!(s > 0.0 && s < t))
        throw validation_error("psi0_finite: requires 0 < s < t");
    return finite_past_kernel(T, t, hurst).value(s, t - s);
}

inline double psi0_diff(double s, double T, double t, hurst_index hurst) {
    if (!(s > 0.0 && s < t))
        throw validation_error("psi0_diff: requires 0 < s < t");
    return finite_past_kernel(T, t, hurst).diff(s, t - s);
}

namespace detail {

inline void check_rho_window(double rho, double h, const char* what) {
    if (!(rho > -0.5 + h && rho < 0.5 + h))
        throw validation_error(std::string(what) +
                               ": rho must lie in (-1/2+H, 1/2+H)");
}

} // namespace detail

// int_0^t [psi0(s;T,t) - psi0(s;T)] s^rho ds: the weighted cost of losing
// the remote past. Endpoint exponents: s^{rho-1/2-H} at 0, (t-s)^{-1/2-H}
// at t.
inline double psi0_gap_integral(double T, double t, double rho, hurst_index hurst,
                          const quad_control& ctl = {}) {
    detail::check_rho_window(rho, hurst, "psi0_gap_integral");
    finite_past_kernel kern(T, t, hurst);
    auto f = [&](double, double dl, double dr) {
        return kern.diff(dl, dr) * std::pow(dl, rho);
    };
    const double h = hurst;
    return integrate_finite(f, 0.0, t, {rho - 0.5 - h, -0.5 - h}, ctl,
                            "psi0_gap_integral")
        .value;
}

// Large-t equivalent of psi0_gap_integral: C(H,rho)/(1/2+H-rho) t^{1+rho} psi0(t;T).
inline double psi0_gap_asymptote(double T, double t, double rho,
                                hurst_index hurst) {
    detail::check_rho_window(rho, hurst, "psi0_gap_asymptote");
    const double h = hurst;
    return baxter_constant(hurst, rho) / (0.5 + h - rho) *
           std::pow(t, 1.0 + rho) * psi0_infinite(t, T, hurst);
}

// int_t^inf psi0(s;T) s^rho ds: the weighted mass the finite window never
// sees. This is the denominator of the prediction-ratio sweeps.
inline double psi0_tail_mass(double T, double t, double rho,
                             hurst_index hurst, const quad_control& ctl = {}) {
    detail::check_rho_window(rho, hurst, "psi0_tail_mass");
    const double h = hurst;
    auto f = [&](double s, double, double) {
        return psi0_infinite(s, T, hurst) * std::pow(s, rho);
    };
    return integrate_upper(f, t, 0.0, tail_decay{1.5 + h - rho}, ctl,
                           "psi0_tail_mass")
        .value;
}

// Two-part split of psi0_gap_integral normalized by t psi0(t;T) g(t), after
// rescaling s to (0,1). part_i collects the (negative) shrinkage of the
// leading kernel term, part_ii the incomplete-beta surplus; each converges
// to its own limit and the limits add up to C(H,rho)/(1/2+H-rho).
struct gap_split {
    double part_i;
    double part_ii;
    double limit_i;
    double limit_ii;
};

inline gap_split psi0_gap_decomposition(double T, double t, double rho,
                                           hurst_index hurst,
                                           const quad_control& ctl = {}) {
    detail::check_rho_window(rho, hurst, "psi0_gap_decomposition");
    const double h = hurst;
    const double a = 0.5 + h;
    const double rT = T / t;
    const double ib = incomplete_beta(T / (t + T), h + 0.5, 1.0 - 2.0 * h);

    auto f_i = [&](double, double dl, double dr) {
        const double shrink = std::expm1((0.5 - h) * std::log(dr / (1.0 + rT)));
        return std::pow(dl, rho - a) * (1.0 + rT) / (dl + rT) * shrink;
    };
    const double part_i =
        integrate_finite(f_i, 0.0, 1.0, {rho - a, 0.5 - h}, ctl,
                         "psi0_gap_decomposition")
            .value;

    const double part_ii = (0.5 - h) * ib * std::pow(t / T, a) * (1.0 + rT) *
                           beta_fn(rho + 0.5 - h, 0.5 - h);

    const double b = beta_fn(0.5 - h + rho, 0.5 - h);
    const double limit_i = (1.0 - (0.5 - h) * b) / (0.5 + h - rho);
    const double limit_ii = (0.5 - h) * b / (0.5 + h);
    return {part_i, part_ii, limit_i, limit_ii};
}

// Limit constant of sqrt(t) * psi0_gap_integral(T, t, H, rho = H): the norm-one
// prediction-error rate (2/pi) cos(piH) C(H,H) T^{1/2+H}.
inline double sqrt_scaling_constant(double T, hurst_index hurst) {
    if (!(T > 0.0))
        throw validation_error("sqrt_scaling_constant: requires T > 0");
    const double h = hurst;
    return 2.0 / std::numbers::pi * std::cos(std::numbers::pi * h) *
           baxter_constant(hurst, h) * std::pow(T, 0.5 + h);
}

} // namespace fbmbax
