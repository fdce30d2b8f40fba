#pragma once

// Adaptive Gauss-Kronrod (7,15) integration with declared endpoint behavior.
//
// Integrands are called as f(x, d_left, d_right) where d_left and d_right are
// the distances to the integration endpoints, computed exactly in the engine's
// transformed variable. A formula with an endpoint singularity must build the
// singular factor from the offset: reconstructing b - x from x alone rounds to
// zero over a wide region near the endpoint, and the resulting bias is smooth,
// so the error estimator never sees it. For the upper-tail routine d_right is
// +infinity.
//
// Endpoint exponents are declared, not detected. integrate_finite substitutes
// x = a + u^q (resp. b - u^q) with q chosen so the transformed integrand is at
// least C^1 at the endpoint; the Kronrod nodes are interior, so the endpoint
// itself is never evaluated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace fbmbax {

using offset_integrand = std::function<double(double x, double d_left, double d_right)>;

struct quad_control {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;           // absolute floor; 0 means purely relative
    std::size_t max_evals = 200000; // per integration piece
};

struct quad_result {
    double value = 0.0;
    double error_bound = 0.0; // estimated absolute error, not a guarantee
    std::size_t evals = 0;
};

// Algebraic endpoint behavior: f ~ (x-a)^alpha near a, f ~ (b-x)^beta near b.
// Zero means the endpoint is regular. Integrability requires exponents > -1.
struct singular_weight {
    double alpha = 0.0;
    double beta = 0.0;
};

// Algebraic tail decay f ~ x^{-p}; integrability on [a, inf) requires p > 1.
struct tail_decay {
    double p;
};

namespace detail {

// QUADPACK dqk15 abscissae and weights. gk_nodes[7] = 0 is the centre; the
// odd-index nodes carry the embedded 7-point Gauss rule.
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double gk_weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double g7_weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct panel {
    double lo, hi;
    double value;
    double err;
};

struct panel_order {
    bool operator()(const panel& a, const panel& b) const { return a.err < b.err; }
};

// One 15-point evaluation over [lo, hi] with the QUADPACK error model
// (scaled |K15 - G7| damped by the deviation integral resasc).
template <class F>
panel eval_panel(const F& f, double lo, double hi, const char* what) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);

    double fv[15];
    fv[7] = f(mid);
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(mid - half * gk_nodes[j]);
        fv[14 - j] = f(mid + half * gk_nodes[j]);
    }
    for (double v : fv) {
        if (!std::isfinite(v))
            throw non_convergence_error(
                std::string(what) + ": integrand evaluated to a non-finite value",
                std::numeric_limits<double>::quiet_NaN(),
                std::numeric_limits<double>::infinity());
    }

    double resk = gk_weights[7] * fv[7];
    double resabs = std::fabs(resk);
    double resg = g7_weights[3] * fv[7];
    for (int j = 0; j < 7; ++j) {
        const double pair = fv[j] + fv[14 - j];
        resk += gk_weights[j] * pair;
        resabs += gk_weights[j] * (std::fabs(fv[j]) + std::fabs(fv[14 - j]));
        if (j % 2 == 1) resg += g7_weights[j / 2] * pair;
    }
    const double reskh = 0.5 * resk;
    double resasc = gk_weights[7] * std::fabs(fv[7] - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += gk_weights[j] *
                  (std::fabs(fv[j] - reskh) + std::fabs(fv[14 - j] - reskh));

    double err = std::fabs((resk - resg) * half);
    resabs *= half;
    resasc *= half;
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(err, 50.0 * eps * resabs);

    return panel{lo, hi, resk * half, err};
}

// Adaptive bisection over [lo, hi] in the engine's own coordinate. Panels
// narrower than the width floor stop splitting; their error is frozen and
// still counts toward the total, so an unresolvable feature surfaces as
// non-convergence instead of a silent wrong answer.
template <class F>
quad_result adapt(const F& f, double lo, double hi, const quad_control& ctl,
                  const char* what) {
    std::priority_queue<panel, std::vector<panel>, panel_order> active;
    quad_result out;

    panel root = eval_panel(f, lo, hi, what);
    out.evals = 15;
    double value = root.value;
    double err_active = root.err;
    double err_frozen = 0.0;
    double value_frozen = 0.0;
    active.push(root);

    const double eps = std::numeric_limits<double>::epsilon();
    const double width_floor =
        50.0 * eps * std::max({std::fabs(lo), std::fabs(hi), 1.0});

    while (true) {
        const double tol = std::max(ctl.abs_tol, ctl.rel_tol * std::fabs(value));
        if (err_active + err_frozen <= tol) break;
        if (active.empty() || out.evals + 30 > ctl.max_evals) {
            throw non_convergence_error(
                std::string(what) + ": accuracy target not reached within budget",
                value, err_active + err_frozen);
        }

        panel worst = active.top();
        active.pop();
        err_active -= worst.err;
        if (worst.hi - worst.lo < width_floor) {
            err_frozen += worst.err;
            value_frozen += worst.value;
            continue;
        }

        const double mid = 0.5 * (worst.lo + worst.hi);
        panel left = eval_panel(f, worst.lo, mid, what);
        panel right = eval_panel(f, mid, worst.hi, what);
        out.evals += 30;
        value += left.value + right.value - worst.value;
        err_active += left.err + right.err;
        active.push(left);
        active.push(right);
    }

    out.value = value;
    out.error_bound = err_active + err_frozen;
    return out;
}

// Substitution exponent: x = a + u^q maps (x-a)^alpha into u^{q(1+alpha)-1},
// and q is chosen to make that power >= 1 (C^1 at the endpoint).
inline double power_substitution_exponent(double alpha) {
    if (alpha == 0.0) return 1.0;
    return std::max(2.0, std::ceil(2.0 / (1.0 + alpha)));
}

template <class F>
quad_result left_weighted_piece(const F& f, double a, double span_lo,
                                double span_hi, double full_len, double alpha,
                                const quad_control& ctl, const char* what) {
    // Integrates f over x in [a + span_lo, a + span_hi] where f ~ (x-a)^alpha.
    // u is the transformed variable: x = a + u^q, d_left = u^q exactly.
    const double q = power_substitution_exponent(alpha);
    if (q == 1.0) {
        auto g = [&](double x) { return f(x, x - a, full_len - (x - a)); };
        return adapt(g, a + span_lo, a + span_hi, ctl, what);
    }
    const double u_lo = std::pow(span_lo, 1.0 / q);
    const double u_hi = std::pow(span_hi, 1.0 / q);
    auto g = [&](double u) {
        const double d = std::pow(u, q);
        return f(a + d, d, full_len - d) * q * std::pow(u, q - 1.0);
    };
    return adapt(g, u_lo, u_hi, ctl, what);
}

template <class F>
quad_result right_weighted_piece(const F& f, double b, double span_lo,
                                 double span_hi, double full_len, double beta,
                                 const quad_control& ctl, const char* what) {
    // Mirror of left_weighted_piece: x = b - u^q, d_right = u^q exactly.
    const double q = power_substitution_exponent(beta);
    if (q == 1.0) {
        auto g = [&](double x) { return f(x, full_len - (b - x), b - x); };
        return adapt(g, b - span_hi, b - span_lo, ctl, what);
    }
    const double u_lo = std::pow(span_lo, 1.0 / q);
    const double u_hi = std::pow(span_hi, 1.0 / q);
    auto g = [&](double u) {
        const double d = std::pow(u, q);
        return f(b - d, full_len - d, d) * q * std::pow(u, q - 1.0);
    };
    return adapt(g, u_lo, u_hi, ctl, what);
}

} // namespace detail

// Integral of f over the finite interval [a, b] with declared algebraic
// endpoint behavior. Each singular endpoint is resolved by a power
// substitution on its half of the interval; the two halves get independent
// eval budgets.
template <class F>
quad_result integrate_finite(const F& f, double a, double b, singular_weight w,
                             const quad_control& ctl,
                             const char* what = "integrate_finite") {
    if (!(std::isfinite(a) && std::isfinite(b)))
        throw validation_error(std::string(what) + ": endpoints must be finite");
    if (!(a < b))
        throw validation_error(std::string(what) + ": requires a < b");
    if (!(w.alpha > -1.0) || !(w.beta > -1.0))
        throw validation_error(std::string(what) +
                               ": endpoint exponents must be > -1 for integrability");
    if (!(ctl.rel_tol > 0.0) && !(ctl.abs_tol > 0.0))
        throw validation_error(std::string(what) + ": no accuracy target set");

    const double len = b - a;
    if (w.alpha == 0.0 && w.beta == 0.0) {
        auto g = [&](double x) { return f(x, x - a, b - x); };
        return detail::adapt(g, a, b, ctl, what);
    }

    const double half_len = 0.5 * len;
    quad_result left = detail::left_weighted_piece(f, a, 0.0, half_len, len,
                                                   w.alpha, ctl, what);
    quad_result right = detail::right_weighted_piece(f, b, 0.0, half_len, len,
                                                     w.beta, ctl, what);
    return quad_result{left.value + right.value,
                       left.error_bound + right.error_bound,
                       left.evals + right.evals};
}

// Integral of f over [a, inf) where f ~ x^{-decay.p} for large x and may have
// an algebraic singularity of exponent alpha at a. The tail beyond the split
// point is mapped to (0, 1] by x = split/v, which turns a pure power tail into
// v^{p-2}; that endpoint is handled as a declared weight of its own.
template <class F>
quad_result integrate_upper(const F& f, double a, double alpha, tail_decay decay,
                            const quad_control& ctl,
                            const char* what = "integrate_upper",
                            double split = 0.0) {
    if (!std::isfinite(a))
        throw validation_error(std::string(what) + ": lower endpoint must be finite");
    if (!(decay.p > 1.0))
        throw validation_error(std::string(what) +
                               ": tail exponent must exceed 1 for integrability");
    if (split == 0.0) split = a + std::max(1.0, std::fabs(a));
    if (!(split > a))
        throw validation_error(std::string(what) + ": split point must exceed a");

    const double inf = std::numeric_limits<double>::infinity();
    quad_result head = integrate_finite(f, a, split, singular_weight{alpha, 0.0},
                                        ctl, what);

    auto tail_f = [&](double v, double v_from_0, double) {
        const double x = split / v_from_0;
        (void)v;
        return f(x, x - a, inf) * split / (v_from_0 * v_from_0);
    };
    quad_result tail = integrate_finite(tail_f, 0.0, 1.0,
                                        singular_weight{decay.p - 2.0, 0.0}, ctl,
                                        what);
    return quad_result{head.value + tail.value,
                       head.error_bound + tail.error_bound,
                       head.evals + tail.evals};
}

} // namespace fbmbax
