#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbmbax/acceptance.hpp"
#include "fbmbax/cli_commands.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fbmbax;

// Relative output paths land in FBMBAX_OUT_DIR when it is set.
std::string resolve_out(const std::string& out) {
    if (out.empty()) return out;
    fs::path p(out);
    if (p.is_relative())
        if (const char* dir = std::getenv("FBMBAX_OUT_DIR"); dir && *dir)
            return (fs::path(dir) / p).string();
    return p.string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw validation_error("cannot open output file '" + path + "'");
    f << content;
    f.flush();
    if (!f) throw validation_error("failed writing '" + path + "'");
    std::cerr << "wrote " << path << "\n";
}

model_config resolve_model(const std::string& path, double hurst) {
    // a config file, when given, wins over the --hurst flag
    return path.empty() ? fbm_config(hurst) : parse_model_config_file(path);
}

std::vector<double> parse_t_grid(const std::string& text) {
    if (text.empty()) return {};
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        grid.push_back(fbmbax::detail::parse_number("t-grid", item));
    return grid;
}

std::string sweep_stem(const std::string& out) {
    fs::path p(out);
    const auto ext = p.extension().string();
    if (ext == ".csv" || ext == ".json") p.replace_extension();
    return p.string();
}

int run_selftest(const std::string& only) {
    int failed = 0;
    if (only.empty()) {
        failed = acceptance::run_all(std::cout);
    } else {
        std::stringstream ss(only);
        std::string id;
        while (std::getline(ss, id, ',')) {
            const auto out = acceptance::run_criterion(id);
            char line[256];
            std::snprintf(line, sizeof(line), "%-3s %-4s %8.2fs  %s (%s)\n",
                          out.id.c_str(), out.passed ? "pass" : "FAIL",
                          out.seconds, out.title.c_str(),
                          out.detail.c_str());
            std::cout << line;
            if (!out.passed) ++failed;
        }
    }
    return failed == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "prediction kernels, Baxter-type sweeps and Monte Carlo checks for "
        "fBm-type processes with Hurst index below 1/2"};
    app.require_subcommand(1);

    std::string model_path, out_path, format = "csv", t_grid_text, only;
    double hurst = 0.25, horizon = 1.0, window = 5.0, rho = 0.25;
    double s_min = std::numeric_limits<double>::quiet_NaN();
    double s_max = std::numeric_limits<double>::quiet_NaN();
    double target = 1.0, tol = 0.0;
    std::string mc_window = "-4,0";
    int grid_size = 0;
    int paths = 10000;
    std::uint64_t seed = 20260814u;

    auto* kernels = app.add_subcommand(
        "kernels", "tabulate the closed kernels over a log-spaced s grid");
    kernels->add_option("--model", model_path, "model config file");
    kernels->add_option("--hurst", hurst, "Hurst index in (0, 1/2)");
    kernels->add_option("--horizon", horizon, "prediction horizon T");
    kernels->add_option("--window", window, "observation window length t");
    kernels->add_option("--s-min", s_min, "smallest s (default window/1000)");
    kernels->add_option("--s-max", s_max, "largest s (default 0.999 window)");
    kernels->add_option("--grid-size", grid_size, "number of s points");
    kernels->add_option("--out", out_path, "output CSV path");

    auto* sweep = app.add_subcommand(
        "baxter-sweep", "normalized ratio sweep along a t grid");
    sweep->add_option("--model", model_path, "model config file");
    sweep->add_option("--hurst", hurst, "Hurst index in (0, 1/2)");
    sweep->add_option("--horizon", horizon, "prediction horizon T");
    sweep->add_option("--rho", rho, "weight exponent of s^rho");
    sweep->add_option("--t-grid", t_grid_text,
                      "comma list of window lengths (default built-in grid)");
    sweep->add_option("--tol", tol, "series truncation tolerance");
    sweep->add_option("--out", out_path,
                      "output stem; writes <stem>.csv and <stem>.json");
    sweep->add_option("--format", format, "stdout format when no --out")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* mc = app.add_subcommand(
        "mc-verify", "simulate paths and compare the two predictors");
    mc->add_option("--model", model_path, "model config file");
    mc->add_option("--hurst", hurst, "Hurst index in (0, 1/2)");
    mc->add_option("--window", mc_window, "observation window as t0,t1");
    mc->add_option("--target", target, "prediction time t2");
    mc->add_option("--grid-size", grid_size,
                   "cells in the window (multiple of 4)");
    mc->add_option("--paths", paths, "Monte Carlo sample size");
    mc->add_option("--seed", seed, "master RNG seed");
    mc->add_option("--tol", tol, "allowed kernel-over-gram MSE excess");
    mc->add_option("--out", out_path, "output JSON path");

    auto* selftest = app.add_subcommand(
        "selftest", "run the acceptance criteria with per-criterion timing");
    selftest->add_option("--only", only,
                         "comma list of criterion ids (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*kernels) {
            cli::kernels_request req;
            req.model = resolve_model(model_path, hurst);
            req.horizon = horizon;
            req.window = window;
            req.s_min = s_min;
            req.s_max = s_max;
            if (grid_size > 0) req.grid_size = grid_size;
            const auto csv = cli::run_kernels(req);
            if (out_path.empty())
                std::cout << csv;
            else
                write_file(resolve_out(out_path), csv);
        } else if (*sweep) {
            cli::sweep_request req;
            req.model = resolve_model(model_path, hurst);
            req.horizon = horizon;
            req.rho = rho;
            req.t_grid = parse_t_grid(t_grid_text);
            if (tol > 0.0) req.tol = tol;
            const auto files = cli::run_baxter_sweep(req);
            if (out_path.empty()) {
                std::cout << (format == "json" ? files.json : files.csv);
            } else {
                const auto stem = resolve_out(sweep_stem(out_path));
                write_file(stem + ".csv", files.csv);
                write_file(stem + ".json", files.json);
            }
        } else if (*mc) {
            cli::mc_request req;
            req.model = resolve_model(model_path, hurst);
            const auto w = parse_t_grid(mc_window);
            if (w.size() != 2)
                throw validation_error(
                    "mc-verify: --window needs exactly t0,t1");
            req.t0 = w[0];
            req.t1 = w[1];
            req.t2 = target;
            if (grid_size > 0) req.grid_size = grid_size;
            req.paths = paths;
            req.seed = seed;
            if (tol > 0.0) req.tol = tol;
            const auto report = cli::run_mc_verify(req);
            if (out_path.empty())
                std::cout << report;
            else
                write_file(resolve_out(out_path), report);
            // a failing verification is a numerical finding, not success
            if (report.find("\"pass\": false") != std::string::npos)
                return 2;
        } else if (*selftest) {
            return run_selftest(only);
        }
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const non_convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
