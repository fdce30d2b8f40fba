#pragma once

// Command bodies behind the CLI: pure request -> text functions so the
// whole surface is unit-testable without spawning processes. Every output
// embeds a hash of the fully resolved configuration; identical requests
// produce byte-identical text.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "baxter_analysis.hpp"
#include "fbm_kernels.hpp"
#include "fbm_simulation.hpp"
#include "model_config.hpp"
#include "reporting.hpp"

namespace fbmbax::cli {

namespace detail {

using params = std::map<std::string, std::string>;

inline std::string render_params(const std::string& command,
                                 const params& p) {
    std::string line = "command=" + command;
    for (const auto& [k, v] : p) line += " " + k + "=" + v;
    return line;
}

inline std::string config_hash(const std::string& command, const params& p,
                               const model_config& model) {
    std::string blob = "command=" + command + "\n";
    for (const auto& [k, v] : p) blob += k + "=" + v + "\n";
    blob += model.canonical();
    return hash_hex(fnv1a64(blob));
}

inline void require_builtin_fbm(const model_config& model,
                                const char* command) {
    if (!model.has("builtin"))
        throw validation_error(
            std::string(command) +
            ": needs the builtin=fbm model (closed kernels and exact "
            "covariance exist for it only)");
}

} // namespace detail

// --------------------------------------------------------------------------
// kernels: tabulate the closed infinite- and finite-past kernels.

struct kernels_request {
    model_config model = fbm_config(0.25);
    double horizon = 1.0;
    double window = 5.0;
    // NaN = derive from the window; zero is not a sentinel, it is rejected
    double s_min = std::numeric_limits<double>::quiet_NaN();
    double s_max = std::numeric_limits<double>::quiet_NaN();
    int grid_size = 100;
};

inline std::string run_kernels(const kernels_request& req) {
    detail::require_builtin_fbm(req.model, "kernels");
    const process_model m = build_model(req.model);
    const double T = req.horizon, t = req.window;
    if (!(T > 0.0)) throw validation_error("kernels: requires horizon > 0");
    if (!(t > 0.0)) throw validation_error("kernels: requires window > 0");
    if (req.grid_size < 1)
        throw validation_error("kernels: requires grid-size >= 1");
    const double s_min = std::isnan(req.s_min) ? 1e-3 * t : req.s_min;
    const double s_max = std::isnan(req.s_max) ? 0.999 * t : req.s_max;
    if (!(s_min > 0.0 && s_min < s_max && s_max < t))
        throw validation_error(
            "kernels: the s grid must lie strictly inside the open window "
            "(0, window); both kernels diverge at the endpoints");

    detail::params p;
    p["grid_size"] = std::to_string(req.grid_size);
    p["horizon"] = g17(T);
    p["hurst"] = g17(m.H);
    p["s_max"] = g17(s_max);
    p["s_min"] = g17(s_min);
    p["window"] = g17(t);

    std::string out = "# " + detail::render_params("kernels", p) + "\n";
    out += "# config_hash=" + detail::config_hash("kernels", p, req.model) +
           "\n";
    out += "s,psi_infinite,psi_finite,diff\n";
    const int n = req.grid_size;
    for (int i = 0; i < n; ++i) {
        const double frac = n == 1 ? 0.0 : double(i) / (n - 1);
        const double s = s_min * std::pow(s_max / s_min, frac);
        out += g17(s) + "," + g17(psi0_infinite(s, T, m.H)) + "," +
               g17(psi0_finite(s, T, t, m.H)) + "," +
               g17(psi0_diff(s, T, t, m.H)) + "\n";
    }
    return out;
}

// --------------------------------------------------------------------------
// baxter-sweep: normalized ratio sweep over a t grid, CSV and JSON.

struct sweep_request {
    model_config model = fbm_config(0.25);
    double horizon = 1.0;
    double rho = 0.25;
    std::vector<double> t_grid; // empty = built-in default grid
    double tol = 1e-6;          // series truncation target
};

struct sweep_files {
    std::string csv;
    std::string json;
};

inline sweep_files run_baxter_sweep(const sweep_request& req) {
    const process_model m = build_model(req.model);
    kernel_series_config cfg;
    cfg.tol = req.tol;
    const auto grid = req.t_grid.empty() ? default_t_grid() : req.t_grid;
    const auto sw =
        ratio_sweep(m, power_weight(req.rho), req.horizon, grid, cfg);

    detail::params p;
    p["horizon"] = g17(req.horizon);
    p["hurst"] = g17(m.H);
    p["rho"] = g17(req.rho);
    p["tol"] = g17(req.tol);
    std::string ts;
    for (double t : grid) ts += (ts.empty() ? "" : ";") + g17(t);
    p["t_grid"] = ts;
    const std::string hash =
        detail::config_hash("baxter-sweep", p, req.model);

    sweep_files out;
    out.csv = "# " + detail::render_params("baxter-sweep", p) + "\n" +
              "# config_hash=" + hash + "\n" + sweep_to_csv(sw);
    nlohmann::json j = sweep_to_json(sw);
    j["command"] = "baxter-sweep";
    j["config_hash"] = hash;
    out.json = j.dump(2) + "\n";
    return out;
}

// --------------------------------------------------------------------------
// mc-verify: simulate, compare predictors, report pass/fail.

struct mc_request {
    model_config model = fbm_config(0.25);
    double t0 = -4.0, t1 = 0.0, t2 = 1.0;
    int grid_size = 256;
    int paths = 10000;
    std::uint64_t seed = 20260814u;
    double tol = 0.05; // allowed kernel-over-gram MSE excess
};

inline std::string run_mc_verify(const mc_request& req) {
    detail::require_builtin_fbm(req.model, "mc-verify");
    const process_model m = build_model(req.model);
    const hurst_index H = m.H;
    if (!(req.t0 < req.t1))
        throw validation_error("mc-verify: requires window t0 < t1");
    if (!(req.t2 > req.t1))
        throw validation_error(
            "mc-verify: requires target > t1 (prediction beyond the window)");
    if (req.grid_size < 20 || req.grid_size % 4 != 0)
        throw validation_error(
            "mc-verify: grid-size must be a multiple of 4 and >= 20 (the "
            "report compares n/4, n/2, n refinements)");
    if (req.paths < 100)
        throw validation_error("mc-verify: requires paths >= 100");
    if (!(req.tol > 0.0))
        throw validation_error("mc-verify: requires tol > 0");

    const double T = req.t2 - req.t1, window = req.t1 - req.t0;
    const auto kern = [&](double s) { return psi0_finite(s, T, window, H); };

    nlohmann::json distances = nlohmann::json::array();
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double mse_gram = 0.0, mse_kern = 0.0;
    for (int n : {req.grid_size / 4, req.grid_size / 2, req.grid_size}) {
        auto grid = make_midpoint_grid(req.t0, req.t1, n);
        auto gp = gram_optimal_predictor(grid, req.t2, H);
        auto kp = kernel_predictor_mse(grid, req.t2, H, kern);
        const double dist = interior_weight_distance(kp.weights, gp.weights);
        distances.push_back({{"n", n}, {"distance", dist}});
        decreasing = decreasing && dist < prev;
        prev = dist;
        mse_gram = gp.mse;
        mse_kern = kp.mse_theoretical;
    }

    auto grid = make_midpoint_grid(req.t0, req.t1, req.grid_size);
    auto ens = simulate_paths(grid, req.t2, H, req.paths, req.seed);
    auto kp = kernel_predictor_mse(grid, req.t2, H, kern, &ens);
    const double emp = *kp.mse_empirical;
    const double band = 3.0 * mse_kern * std::sqrt(2.0 / req.paths);

    const bool optimal = mse_gram <= mse_kern;
    const bool close = mse_kern <= (1.0 + req.tol) * mse_gram;
    const bool emp_ok = std::abs(emp - mse_kern) <= band;
    const bool pass = optimal && close && emp_ok && decreasing;

    detail::params p;
    p["grid_size"] = std::to_string(req.grid_size);
    p["hurst"] = g17(H);
    p["paths"] = std::to_string(req.paths);
    p["seed"] = std::to_string(req.seed);
    p["t0"] = g17(req.t0);
    p["t1"] = g17(req.t1);
    p["t2"] = g17(req.t2);
    p["tol"] = g17(req.tol);

    nlohmann::json j;
    j["command"] = "mc-verify";
    j["config_hash"] = detail::config_hash("mc-verify", p, req.model);
    j["model"] = m.name;
    j["hurst"] = double(H);
    j["window"] = {req.t0, req.t1};
    j["target"] = req.t2;
    j["grid_size"] = req.grid_size;
    j["paths"] = req.paths;
    j["seed"] = req.seed;
    j["tol"] = req.tol;
    j["mse_gram"] = mse_gram;
    j["mse_kernel_theoretical"] = mse_kern;
    j["mse_kernel_empirical"] = emp;
    j["empirical_band_3sigma"] = band;
    j["weight_distances"] = distances;
    j["checks"] = {{"gram_not_above_kernel", optimal},
                   {"kernel_within_tol_of_gram", close},
                   {"empirical_within_3sigma", emp_ok},
                   {"weight_distance_decreasing", decreasing}};
    j["pass"] = pass;
    return j.dump(2) + "\n";
}

} // namespace fbmbax::cli
