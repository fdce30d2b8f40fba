#pragma once

// Acceptance gate: nine self-contained criteria exercising the full stack
// end to end, each with its tolerances pinned here. The same registry backs
// the standalone acceptance binary and the CLI selftest command.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "baxter_analysis.hpp"
#include "fbm_kernels.hpp"
#include "fbm_simulation.hpp"
#include "process_model.hpp"
#include "special_functions.hpp"

namespace fbmbax::acceptance {

struct hooks {
    // Replaces the predictor-constant evaluation inside A3. Exists so the
    // suite can prove the gate reacts to a wrong constant; never set in
    // production paths.
    std::function<double(double, double)> constant_override;
};

struct outcome {
    std::string id;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    std::string detail;
};

namespace detail {

struct check_log {
    bool ok = true;
    std::string fail;

    void require(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (!fail.empty()) fail += "; ";
        fail += what;
    }
};

inline double rel(double got, double want) {
    return std::abs(got / want - 1.0);
}

inline std::string fmt(const char* pattern, double a, double b = 0.0,
                       double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// --- A1: quadrature of the base kernel against the closed kernel ---------
inline void a1(check_log& log, std::string& detail) {
    double worst = 0.0;
    for (double h : {0.1, 0.25, 0.4}) {
        const hurst_index H(h);
        auto m = make_fbm_model(H);
        for (int i = 0; i < 20; ++i) {
            const double s = std::pow(10.0, -2.0 + 4.0 * i / 19.0);
            worst = std::max(
                worst, rel(b_kernel(m, s, 1.0), psi0_infinite(s, 1.0, H)));
        }
    }
    log.require(worst < 1e-8, fmt("max rel %.2e >= 1e-8", worst));
    detail = fmt("max rel %.2e over 60 points (tol 1e-8)", worst);
}

// --- A2: truncated series against the closed finite-past kernel ----------
inline void a2(check_log& log, std::string& detail) {
    const hurst_index H(0.25);
    auto m = make_fbm_model(H);
    const double T = 1.0, t = 5.0;
    // stop at half the criterion's bound target so the certificate clears
    // 1e-6 with real margin instead of landing on it
    kernel_series_config cfg;
    cfg.k_max = 48;
    cfg.tol = 5e-7;
    kernel_series chain(m, T, t, cfg);
    double worst_rel = 0.0, worst_bound = 0.0;
    int max_terms = 0;
    // interior grid: 1% of the window trimmed at each end
    for (int i = 0; i <= 8; ++i) {
        const double s = 0.05 + i * (4.90 / 8.0);
        const auto got = chain.psi(s);
        worst_rel = std::max(worst_rel, rel(got.value, psi0_finite(s, T, t, H)));
        worst_bound =
            std::max(worst_bound, got.truncation_bound / got.value);
        max_terms = std::max(max_terms, got.terms_used);
    }
    log.require(worst_rel < 1e-4, fmt("max rel %.2e >= 1e-4", worst_rel));
    log.require(worst_bound < 1e-6,
                fmt("max bound/value %.2e >= 1e-6", worst_bound));
    detail = fmt("max rel %.2e, max bound/value %.2e, <= %.0f terms",
                 worst_rel, worst_bound, double(max_terms));
}

// --- A3: constants cross-checked against independent oracles -------------
inline void a3(check_log& log, std::string& detail, const hooks& hk) {
    auto constant = [&](double h, double rho) {
        return hk.constant_override ? hk.constant_override(h, rho)
                                    : baxter_constant(hurst_index(h), rho);
    };
    log.require(constant(0.25, 0.0) == 1.0, "C(H,0) != 1 exactly");
    const double c_err =
        std::abs(constant(0.25, 0.25) - 0.56299040761798003159);
    log.require(c_err < 1e-10, fmt("C(0.25,0.25) off by %.2e", c_err));

    double worst_f = 0.0;
    for (double u : {0.1, 1.0, 10.0}) {
        const double closed =
            std::log1p(u) / (std::numbers::pi * std::numbers::pi * u);
        worst_f = std::max(worst_f, rel(f_k_by_recursion(2, u), closed));
    }
    log.require(worst_f < 1e-10, fmt("f_2 max rel %.2e >= 1e-10", worst_f));

    auto m = make_fbm_model(hurst_index(0.25));
    const double cospi = std::cos(std::numbers::pi * 0.25);
    double worst_b = 0.0;
    for (double t : {0.5, 2.0, 10.0})
        worst_b = std::max(
            worst_b, rel(beta_kernel(m, t), cospi / (std::numbers::pi * t)));
    log.require(worst_b < 1e-8, fmt("beta max rel %.2e >= 1e-8", worst_b));
    detail = fmt("C off %.2e, f_2 rel %.2e, beta rel %.2e", c_err, worst_f,
                 worst_b);
}

// --- A4: weighted kernel-difference integral vs its asymptote ------------
inline void a4(check_log& log, std::string& detail) {
    double worst_final = 0.0;
    for (double h : {0.1, 0.25, 0.4}) {
        const hurst_index H(h);
        for (double rho : {0.0, h}) {
            double prev = std::numeric_limits<double>::infinity();
            for (double t : {1e2, 1e3, 1e4}) {
                const double dev = std::abs(psi0_gap_integral(1.0, t, rho, H) /
                                                psi0_gap_asymptote(1.0, t, rho,
                                                                  H) -
                                            1.0);
                log.require(dev < prev,
                            fmt("dev not decreasing at H=%.2f rho=%.2f", h,
                                rho));
                prev = dev;
            }
            log.require(prev < 0.05,
                        fmt("final dev %.3f >= 0.05 at H=%.2f", prev, h));
            worst_final = std::max(worst_final, prev);
        }
    }
    detail = fmt("worst final dev %.2e (tol 0.05)", worst_final);
}

// --- A5: normalized sweep approaches the predictor constant --------------
inline void a5(check_log& log, std::string& detail) {
    auto m = make_fbm_model(hurst_index(0.25));
    double worst_final = 0.0;
    for (double rho : {0.25, 0.1}) {
        const auto sw = ratio_sweep(m, power_weight(rho), 1.0,
                                    default_t_grid());
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& row : sw.rows) {
            const double dev = std::abs(row.ratio - sw.constant);
            log.require(dev < prev,
                        fmt("dev not decreasing at rho=%.2f t=%.0f", rho,
                            row.t));
            prev = dev;
        }
        log.require(prev < 0.05, fmt("final dev %.3f >= 0.05", prev));
        log.require(std::isfinite(sw.m_hat) &&
                        sw.m_hat >= sw.constant - 0.05,
                    "empirical sup below the constant");
        worst_final = std::max(worst_final, prev);
    }
    // unit-mass identity: with flat weight both sides coincide, the ratio
    // sits at 1 up to series truncation
    const auto flat = ratio_sweep(m, power_weight(0.0), 1.0,
                                  default_t_grid());
    double worst_flat = 0.0;
    for (const auto& row : flat.rows)
        worst_flat = std::max(worst_flat, std::abs(row.ratio - 1.0));
    log.require(worst_flat < 1e-5,
                fmt("flat-weight ratio off by %.2e >= 1e-5", worst_flat));
    detail = fmt("worst final dev %.2e, flat-weight off %.2e", worst_final,
                 worst_flat);
}

// --- A6: square-root scaling with the predicted constant -----------------
inline void a6(check_log& log, std::string& detail) {
    auto m = make_fbm_model(hurst_index(0.25));
    const auto sw = scaling_limit_sweep(m, 1.0, 0.0, {1e2, 1e3, 1e4});
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : sw.rows) {
        const double dev = std::abs(row.ratio - 1.0);
        log.require(dev < prev, fmt("dev not decreasing at t=%.0f", row.t));
        prev = dev;
    }
    log.require(prev < 0.05, fmt("final dev %.3f >= 0.05", prev));
    const double agree =
        rel(scaling_limit_constant(m, 1.0), sqrt_scaling_constant(1.0, m.H));
    log.require(agree < 1e-8,
                fmt("constant routes disagree by %.2e >= 1e-8", agree));
    const double lit = std::abs(sw.constant - 0.25343472490920366377);
    log.require(lit < 1e-9, fmt("constant off oracle by %.2e", lit));
    detail = fmt("final dev %.2e, route gap %.2e", prev, agree);
}

// --- A7: chain kernels obey the geometric bound and the scaling limit ----
inline void a7(check_log& log, std::string& detail) {
    auto m = make_fbm_model(hurst_index(0.25));
    const double cospi = std::cos(std::numbers::pi * 0.25);
    const double r = 1.1, t = 1e3;
    double worst_margin = 0.0;
    for (int k : {1, 2, 3}) {
        const double cap = f_k(k, 0.0) * std::pow(r * cospi, k) / t;
        for (double u : {0.5, 2.0, 10.0})
            for (double v : {0.5, 2.0, 10.0}) {
                const double val = delta_k(m, k, t, u, v);
                log.require(val < cap,
                            fmt("bound violated at k=%.0f u=%.1f v=%.1f",
                                double(k), u, v));
                worst_margin = std::max(worst_margin, val / cap);
            }
    }
    double worst_err = 0.0;
    for (int k : {1, 2})
        for (double u : {0.5, 1.0}) {
            const double limit = f_k(k, u) * std::pow(cospi, k);
            double prev = std::numeric_limits<double>::infinity();
            for (double tt : {1e2, 1e3, 1e4}) {
                const double err =
                    std::abs(tt * delta_k(m, k, tt, tt * u, 1.0) - limit);
                log.require(err < prev,
                            fmt("scaling error not decreasing at k=%.0f "
                                "u=%.1f",
                                double(k), u));
                prev = err;
            }
            worst_err = std::max(worst_err, prev / limit);
        }
    detail = fmt("bound margin %.2f, scaling rel err %.2e", worst_margin,
                 worst_err);
}

// --- A8: Monte Carlo comparison of the two predictors --------------------
inline void a8(check_log& log, std::string& detail) {
    const hurst_index H(0.25);
    const auto kern = [&](double s) { return psi0_finite(s, 1.0, 4.0, H); };
    double prev_dist = std::numeric_limits<double>::infinity();
    double excess = 0.0, dist = 0.0;
    for (int n : {64, 128, 256}) {
        auto grid = make_midpoint_grid(-4.0, 0.0, n);
        auto gp = gram_optimal_predictor(grid, 1.0, H);
        auto kp = kernel_predictor_mse(grid, 1.0, H, kern);
        log.require(gp.mse <= kp.mse_theoretical,
                    fmt("optimality violated at n=%.0f", double(n)));
        dist = interior_weight_distance(kp.weights, gp.weights);
        log.require(dist < prev_dist,
                    fmt("weight distance not decreasing at n=%.0f",
                        double(n)));
        prev_dist = dist;
        excess = kp.mse_theoretical / gp.mse - 1.0;
    }
    log.require(excess <= 0.05,
                fmt("kernel MSE exceeds gram MSE by %.3f > 5%%", excess));

    auto grid = make_midpoint_grid(-4.0, 0.0, 256);
    auto ens = simulate_paths(grid, 1.0, H, 10000, 20260814u);
    auto kp = kernel_predictor_mse(grid, 1.0, H, kern, &ens);
    const double gap = std::abs(*kp.mse_empirical - kp.mse_theoretical);
    const double band =
        3.0 * kp.mse_theoretical * std::sqrt(2.0 / 10000.0);
    log.require(gap <= band,
                fmt("empirical MSE off by %.2e > 3 sigma %.2e", gap, band));
    detail = fmt("MSE excess %.2e, dist %.4f, empirical gap %.1e", excess,
                 dist, gap);
}

// --- A9: series route equals the closed route of the weighted integral ---
inline void a9(check_log& log, std::string& detail) {
    const hurst_index H(0.25);
    auto m = make_fbm_model(H);
    const double series = baxter_lhs(m, power_weight(0.0), 1.0, 1e2);
    const double closed = psi0_gap_integral(1.0, 1e2, 0.0, H);
    const double err = rel(series, closed);
    log.require(err < 1e-3, fmt("routes disagree by %.2e >= 1e-3", err));
    detail = fmt("route gap %.2e (tol 1e-3)", err);
}

struct criterion {
    const char* id;
    const char* title;
    void (*run)(check_log&, std::string&, const hooks&);
};

inline const std::vector<criterion>& registry() {
    static const std::vector<criterion> all = {
        {"A1", "quadrature base kernel agrees with the closed kernel",
         [](check_log& l, std::string& d, const hooks&) { a1(l, d); }},
        {"A2", "truncated series matches the closed finite-past kernel",
         [](check_log& l, std::string& d, const hooks&) { a2(l, d); }},
        {"A3", "constants agree with independent oracles",
         [](check_log& l, std::string& d, const hooks& h) { a3(l, d, h); }},
        {"A4", "weighted kernel difference approaches its asymptote",
         [](check_log& l, std::string& d, const hooks&) { a4(l, d); }},
        {"A5", "normalized sweep converges to the predictor constant",
         [](check_log& l, std::string& d, const hooks&) { a5(l, d); }},
        {"A6", "unit-norm sweep follows the square-root scaling law",
         [](check_log& l, std::string& d, const hooks&) { a6(l, d); }},
        {"A7", "chain kernels obey the geometric bound and scaling limit",
         [](check_log& l, std::string& d, const hooks&) { a7(l, d); }},
        {"A8", "Monte Carlo predictor comparison stays within tolerance",
         [](check_log& l, std::string& d, const hooks&) { a8(l, d); }},
        {"A9", "series route equals the closed route",
         [](check_log& l, std::string& d, const hooks&) { a9(l, d); }},
    };
    return all;
}

} // namespace detail

inline std::vector<std::string> criterion_ids() {
    std::vector<std::string> ids;
    for (const auto& c : detail::registry()) ids.push_back(c.id);
    return ids;
}

inline outcome run_criterion(const std::string& id, const hooks& hk = {}) {
    for (const auto& c : detail::registry()) {
        if (id != c.id) continue;
        outcome out;
        out.id = c.id;
        out.title = c.title;
        const auto start = std::chrono::steady_clock::now();
        detail::check_log log;
        try {
            c.run(log, out.detail, hk);
            out.passed = log.ok;
            if (!log.ok) out.detail = log.fail;
        } catch (const std::exception& e) {
            out.passed = false;
            out.detail = std::string("exception: ") + e.what();
        }
        out.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        return out;
    }
    throw validation_error("run_criterion: unknown criterion '" + id + "'");
}

// Runs every criterion, printing one line each; returns the failure count.
inline int run_all(std::ostream& os, const hooks& hk = {}) {
    int failed = 0;
    double total = 0.0;
    for (const auto& c : detail::registry()) {
        const auto out = run_criterion(c.id, hk);
        total += out.seconds;
        if (!out.passed) ++failed;
        char line[256];
        std::snprintf(line, sizeof(line), "%-3s %-4s %8.2fs  %s (%s)\n",
                      out.id.c_str(), out.passed ? "pass" : "FAIL",
                      out.seconds, out.title.c_str(), out.detail.c_str());
        os << line;
    }
    char tail[96];
    std::snprintf(tail, sizeof(tail), "%d/%d criteria passed in %.1fs\n",
                  int(detail::registry().size()) - failed,
                  int(detail::registry().size()), total);
    os << tail;
    return failed;
}

} // namespace fbmbax::acceptance
