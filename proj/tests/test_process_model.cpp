#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fbmbax/fbm_kernels.hpp"
#include "fbmbax/process_model.hpp"

using namespace fbmbax;

namespace {
double rel(double got, double want) { return std::abs(got / want - 1.0); }
} // namespace

TEST_CASE("fbm model coefficients match their closed forms") {
    auto m = make_fbm_model(hurst_index(0.25));
    CHECK(rel(m.c.eval(1.0), 0.81604893909826298108) < 1e-14);
    CHECK(rel(m.c.eval(2.0), 0.68621262755932615719) < 1e-14);
    CHECK(rel(m.a.eval(1.0), 0.20686174712265698577) < 1e-14);
    CHECK(rel(m.a.eval(2.0), 0.061500365375039337449) < 1e-14);
    CHECK(rel(m.beta_closed(1.0), 0.22507907903927651739) < 1e-14);
    CHECK(rel(m.beta_closed(3.0), 0.07502635967975883913) < 1e-14);
    CHECK(m.c.singularity_order == -0.25);
    CHECK(m.a.tail_exponent == 1.75);

    // the closed base kernel is the one-sided infinite-past kernel
    for (double s : {0.3, 1.0, 4.0})
        for (double u : {0.5, 1.0, 2.0})
            CHECK(rel(m.b_closed(s, u), psi0_infinite(s, u, m.H)) < 1e-15);

    // coefficients decrease
    CHECK(m.c.eval(2.0) < m.c.eval(1.0));
    CHECK(m.a.eval(2.0) < m.a.eval(1.0));
}

TEST_CASE("c_from_nu evaluates Laplace transforms of generating measures") {
    SECTION("single atom gives a pure exponential") {
        nu_measure nu;
        nu.atoms = {{1.0, 0.7}};
        CHECK(rel(c_from_nu(nu, 0.5), std::exp(-0.35)) < 1e-14);
        CHECK(rel(c_from_nu(nu, 2.0), std::exp(-1.4)) < 1e-14);
    }
    SECTION("fbm generating density reproduces the closed coefficient") {
        hurst_index H(0.25);
        auto m = make_fbm_model(H);
        const double w = std::cos(std::numbers::pi * 0.25) / std::numbers::pi;
        nu_measure nu;
        nu.density = [=](double s) { return w * std::pow(s, -0.75); };
        nu.density_singularity = -0.75;
        nu.density_tail = 0.75;
        for (double t : {0.1, 1.0, 10.0})
            CHECK(rel(c_from_nu(nu, t), m.c.eval(t)) < 1e-7);
    }
    SECTION("atoms and density add") {
        nu_measure atoms_only;
        atoms_only.atoms = {{0.4, 1.0}, {0.6, 3.0}};
        nu_measure dens_only;
        dens_only.density = [](double s) { return std::exp(-s); };
        dens_only.density_tail = 2.0;
        nu_measure both = dens_only;
        both.atoms = atoms_only.atoms;
        const double t = 1.3;
        CHECK(rel(c_from_nu(both, t),
                  c_from_nu(atoms_only, t) + c_from_nu(dens_only, t)) < 1e-14);
        // exp density: int e^{-ts} e^{-s} ds = 1/(1+t)
        CHECK(rel(c_from_nu(dens_only, t), 1.0 / (1.0 + t)) < 1e-11);
    }
    SECTION("non-integrable declarations are rejected") {
        nu_measure bad;
        bad.density = [](double s) { return std::pow(s, -1.2); };
        bad.density_singularity = -1.2;
        CHECK_THROWS_AS(c_from_nu(bad, 1.0), validation_error);
        bad.density_singularity = -0.5;
        bad.density_tail = 0.0;
        CHECK_THROWS_AS(c_from_nu(bad, 1.0), validation_error);
        nu_measure neg;
        neg.atoms = {{-1.0, 1.0}};
        CHECK_THROWS_AS(c_from_nu(neg, 1.0), validation_error);
        nu_measure ok;
        ok.atoms = {{1.0, 1.0}};
        CHECK_THROWS_AS(c_from_nu(ok, 0.0), validation_error);
    }
}

TEST_CASE("base kernel quadrature matches the closed fbm kernel") {
    for (double h : {0.1, 0.25, 0.4}) {
        hurst_index H(h);
        auto m = make_fbm_model(H);
        for (double s : {0.5, 1.0, 2.0})
            for (double u : {0.5, 1.0, 3.0})
                CHECK(rel(b_kernel(m, s, u), psi0_infinite(s, u, H)) < 1e-9);
    }
    auto m = make_fbm_model(hurst_index(0.25));
    CHECK(b_kernel(m, 2.0, 1.0) < b_kernel(m, 1.0, 1.0));
    const double tiny = b_kernel(m, 1.0, 0.01);
    CHECK(tiny > 0.0);
    CHECK(tiny < b_kernel(m, 1.0, 1.0));
    CHECK_THROWS_AS(b_kernel(m, 0.0, 1.0), validation_error);
    CHECK_THROWS_AS(b_kernel(m, 1.0, 0.0), validation_error);
}

TEST_CASE("beta kernel quadrature matches cos(piH)/(pi t)") {
    for (double h : {0.1, 0.25, 0.4}) {
        hurst_index H(h);
        auto m = make_fbm_model(H);
        const double want = std::cos(std::numbers::pi * h) / std::numbers::pi;
        for (double t : {1.0, 3.0})
            CHECK(rel(beta_kernel(m, t), want / t) < 1e-9);
        // t beta(t) is constant for this family
        CHECK(rel(10.0 * beta_kernel(m, 10.0), beta_kernel(m, 1.0)) < 1e-9);
    }
    auto m = make_fbm_model(hurst_index(0.25));
    CHECK_THROWS_AS(beta_kernel(m, 0.0), validation_error);
}

TEST_CASE("delta kernels: closed forms, scaling limit, uniform bound") {
    hurst_index H(0.25);
    auto m = make_fbm_model(H);
    const double cospi = std::cos(std::numbers::pi * 0.25);

    SECTION("delta_1 is beta of the summed arguments") {
        CHECK(rel(delta_k(m, 1, 2.0, 1.0, 0.5), m.beta_closed(3.5)) < 1e-15);
    }
    SECTION("delta_2 matches the independent log-ratio form") {
        // int_0^inf beta(t+v+w) beta(t+u+w) dw = (cos/pi)^2 ln((t+u)/(t+v))/(u-v)
        CHECK(rel(delta_k(m, 2, 2.0, 1.0, 0.5), 0.018473035937877192453) <
              1e-9);
        CHECK(rel(delta_k(m, 2, 10.0, 3.0, 7.0), 0.0033976030812981438612) <
              1e-9);
    }
    SECTION("t delta_k(t, tu, v) approaches f_k(u) cos^k(piH)") {
        for (int k : {1, 2})
            for (double u : {0.5, 1.0}) {
                const double limit = f_k(k, u) * std::pow(cospi, k);
                double prev = std::numeric_limits<double>::infinity();
                for (double t : {1e2, 1e3, 1e4}) {
                    const double err =
                        std::abs(t * delta_k(m, k, t, t * u, 1.0) - limit);
                    CHECK(err < prev);
                    prev = err;
                }
                CHECK(prev < 1e-3 * limit);
            }
    }
    SECTION("delta_k stays under f_k(0) (r cos piH)^k / t at large t") {
        const double r = 1.1, t = 1e3;
        for (int k : {1, 2, 3}) {
            const double cap = f_k(k, 0.0) * std::pow(r * cospi, k) / t;
            for (double u : {0.5, 2.0, 10.0})
                for (double v : {0.5, 2.0, 10.0})
                    CHECK(delta_k(m, k, t, u, v) < cap);
        }
    }
    SECTION("validation") {
        CHECK_THROWS_AS(delta_k(m, 0, 1.0, 1.0, 1.0), validation_error);
        CHECK_THROWS_AS(delta_k(m, 7, 1.0, 1.0, 1.0), validation_error);
        CHECK_THROWS_AS(delta_k(m, 1, 0.0, 1.0, 1.0), validation_error);
    }
}

TEST_CASE("iterated kernels agree across the two evaluation routes") {
    hurst_index H(0.25);
    auto m = make_fbm_model(H);
    const double s = 0.5, T = 1.0, t = 5.0;
    kernel_series chain(m, T, t);
    CHECK(rel(chain.b_k(1, s), psi0_infinite(s, T, H)) < 1e-15);
    CHECK(rel(chain.b_k(1, 3.0), psi0_infinite(3.0, T, H)) < 1e-15);
    CHECK(rel(chain.b_k(2, s), b_k_via_delta(m, 2, s, T, t)) < 1e-5);
    CHECK(rel(chain.b_k(3, s), b_k_via_delta(m, 3, s, T, t)) < 1e-4);
    CHECK_THROWS_AS(b_k_via_delta(m, 1, s, T, t), validation_error);
}

TEST_CASE("kernel series reproduces the closed finite-past kernel") {
    hurst_index H(0.25);
    auto m = make_fbm_model(H);
    const double T = 1.0, t = 5.0;
    kernel_series chain(m, T, t);

    SECTION("partial sums bracket from above: already the first pair does") {
        const double s = 0.5;
        CHECK(chain.b_k(1, s) + chain.b_k(2, t - s) > psi0_infinite(s, T, H));
    }
    SECTION("value and certified truncation bound at default settings") {
        for (double s : {0.5, 2.5, 4.0}) {
            auto got = chain.psi(s);
            const double closed = psi0_finite(s, T, t, H);
            CHECK(rel(got.value, closed) < 1e-4);
            CHECK(got.truncation_bound < 1e-6 * got.value);
            CHECK(got.terms_used <= 28);
        }
    }
    SECTION("difference series needs a looser target at this window") {
        kernel_series_config cfg;
        cfg.tol = 1e-4;
        kernel_series loose(m, T, t, cfg);
        for (double s : {0.5, 2.5}) {
            auto got = loose.diff(s);
            CHECK(rel(got.value, psi0_diff(s, T, t, H)) < 1e-4);
            CHECK(got.value > 0.0);
        }
    }
    SECTION("k_max exhaustion raises a truncation error with the partial sum") {
        kernel_series_config cfg;
        cfg.k_max = 6;
        cfg.tol = 1e-10;
        kernel_series short_chain(m, T, t, cfg);
        const double closed = psi0_finite(0.5, T, t, H);
        try {
            short_chain.psi(0.5);
            FAIL("expected non_convergence_error");
        } catch (const non_convergence_error& e) {
            CHECK(e.best_estimate > 0.9 * closed);
            CHECK(e.best_estimate < closed);
        }
    }
    SECTION("argument validation") {
        CHECK_THROWS_AS(chain.psi(0.0), validation_error);
        CHECK_THROWS_AS(chain.psi(t), validation_error);
        CHECK_THROWS_AS(chain.b_k(0, 1.0), validation_error);
        kernel_series_config bad;
        bad.r = 2.0; // needs r cos(piH) < 1, cos(pi/4) = 0.707
        CHECK_THROWS_AS(kernel_series(m, T, t, bad), validation_error);
    }
}

TEST_CASE("series behaves across the hurst range") {
    const double T = 1.0, t = 5.0, s = 0.5;
    SECTION("H = 0.4 contracts fast") {
        auto m = make_fbm_model(hurst_index(0.4));
        auto got = psi_finite_series(m, s, T, t);
        CHECK(rel(got.value, psi0_finite(s, T, t, m.H)) < 1e-6);
        CHECK(got.terms_used <= 12);
    }
    SECTION("H = 0.1 contracts slowly; a loose target still certifies") {
        auto m = make_fbm_model(hurst_index(0.1));
        kernel_series_config cfg;
        cfg.tol = 8e-3;
        auto got = psi_finite_series(m, s, T, t, cfg);
        CHECK(rel(got.value, psi0_finite(s, T, t, m.H)) < 1e-2);
        CHECK(got.truncation_bound < 8e-3 * got.value);
    }
}

TEST_CASE("kernel tail sandwich and normalized decay") {
    hurst_index H(0.25);
    auto m = make_fbm_model(H);
    const double T = 1.0;
    auto cf = [&](double, double dl, double) { return m.c.eval(dl); };
    const double c_mass =
        integrate_finite(cf, 0.0, T, {m.c.singularity_order, 0.0}, {},
                         "c_mass")
            .value;
    CHECK(rel(c_mass, 1.0880652521310173081) < 1e-12);

    SECTION("a(T+t) int c <= b(t,T) <= a(t) int c") {
        for (double t : {1.0, 10.0}) {
            const double mid = b_kernel(m, t, T);
            CHECK(m.a.eval(T + t) * c_mass <= mid);
            CHECK(mid <= m.a.eval(t) * c_mass);
        }
    }
    SECTION("normalized tail ratio rises to 1 like t/(t+T)") {
        const double norm =
            gamma_fn(0.5 - m.H) / ((0.5 + m.H) * c_mass);
        double prev_gap = 1.0;
        for (double t : {10.0, 100.0, 1000.0}) {
            const double ratio =
                b_kernel(m, t, T) * std::pow(t, 1.5 + m.H) * norm;
            CHECK(rel(ratio, t / (t + T)) < 1e-8);
            const double gap = std::abs(ratio - 1.0);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
    }
}

TEST_CASE("per-term majorant decreases, then turns as f_k(0) growth wins") {
    hurst_index H(0.25);
    auto m = make_fbm_model(H);
    const double s = 0.5, T = 1.0, t = 1e3, r = 1.1;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= 6; ++k) {
        const double cap = series_term_majorant(m, k, s, T, t, r);
        CHECK(cap > 0.0);
        CHECK(cap < prev);
        prev = cap;
    }
    // the factorial growth of f_k(0) eventually beats x^k: the majorant is
    // per-term only, never a tail bound
    CHECK(series_term_majorant(m, 7, s, T, t, r) > prev);
    CHECK_THROWS_AS(series_term_majorant(m, 1, s, T, t, r), validation_error);
    CHECK_THROWS_AS(series_term_majorant(m, 2, s, T, t, 2.0),
                    validation_error);
}
