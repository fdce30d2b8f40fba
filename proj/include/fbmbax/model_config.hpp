#pragma once

// Declarative model definitions: a flat key=value document selecting either
// the built-in fBm model or a custom spectral measure plus an analytic
// autoregressive tail. Unknown keys are hard errors so a typo cannot
// silently fall back to defaults.
//
//   builtin = fbm              # or omit and declare nu.* / a.* instead
//   hurst = 0.25               # always required
//   name = my-model            # optional label
//   ell = 1.0                  # optional normalization of c
//   nu.density.family = power  # power: coeff * x^exponent, exponent in (-1,-1/2)
//   nu.density.coeff = 0.225
//   nu.density.exponent = -0.75
//   nu.density.family = exp    # exp: coeff * e^{-rate x}
//   nu.density.rate = 1.0
//   nu.atoms = 0.8@0.7, 0.1@2  # weight@rate terms added to the density
//   a.family = fbm             # exact fBm tail for the declared hurst
//   a.family = power           # a.coeff * t^{-(3/2+H)}; coeff free, the
//                              # exponent is pinned by hurst
//   a.coeff = 0.5

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "process_model.hpp"

namespace fbmbax {

struct model_config {
    std::map<std::string, std::string> entries;

    bool has(const std::string& key) const { return entries.count(key) != 0; }
    const std::string& at(const std::string& key) const {
        return entries.at(key);
    }

    // Sorted key=value lines; the hashing surface for run metadata.
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : entries) {
            out += k;
            out += '=';
            out += v;
            out += '\n';
        }
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw validation_error("model config: key '" + key +
                               "' needs a number, got '" + value + "'");
    }
    while (pos < value.size() &&
           (value[pos] == ' ' || value[pos] == '\t'))
        ++pos;
    if (pos != value.size())
        throw validation_error("model config: key '" + key +
                               "' needs a number, got '" + value + "'");
    return x;
}

inline std::vector<nu_atom> parse_atoms(const std::string& value) {
    std::vector<nu_atom> atoms;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw validation_error(
                "model config: empty term in nu.atoms list");
        const auto at = item.find('@');
        if (at == std::string::npos)
            throw validation_error(
                "model config: nu.atoms terms use weight@rate, got '" +
                item + "'");
        const double w =
            parse_number("nu.atoms", trim(item.substr(0, at)));
        const double r =
            parse_number("nu.atoms", trim(item.substr(at + 1)));
        if (!(w >= 0.0) || !(r >= 0.0))
            throw validation_error(
                "model config: nu.atoms needs weight, rate >= 0, got '" +
                item + "'");
        atoms.push_back({w, r});
    }
    if (atoms.empty())
        throw validation_error("model config: nu.atoms declared but empty");
    return atoms;
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "builtin",           "name",
        "hurst",             "ell",
        "nu.density.family", "nu.density.coeff",
        "nu.density.exponent", "nu.density.rate",
        "nu.atoms",          "a.family",
        "a.coeff"};
    return keys;
}

} // namespace detail

inline model_config parse_model_config(const std::string& text) {
    model_config cfg;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error("model config: line " +
                                   std::to_string(line_no) +
                                   " is not key = value: '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto& known = detail::known_keys();
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw validation_error("model config: unknown key '" + key + "'");
        if (value.empty())
            throw validation_error("model config: key '" + key +
                                   "' has no value");
        if (!cfg.entries.emplace(key, value).second)
            throw validation_error("model config: duplicate key '" + key +
                                   "'");
    }
    if (!cfg.has("hurst"))
        throw validation_error("model config: missing required key 'hurst'");

    if (cfg.has("builtin")) {
        if (cfg.at("builtin") != "fbm")
            throw validation_error("model config: unknown builtin '" +
                                   cfg.at("builtin") + "' (only fbm)");
        for (const auto& [k, v] : cfg.entries)
            if (k.rfind("nu.", 0) == 0 || k.rfind("a.", 0) == 0)
                throw validation_error(
                    "model config: '" + k +
                    "' conflicts with builtin=fbm (pick one)");
    } else {
        if (!cfg.has("a.family"))
            throw validation_error(
                "model config: custom model needs a.family (fbm or power)");
        if (!cfg.has("nu.density.family") && !cfg.has("nu.atoms"))
            throw validation_error(
                "model config: custom model needs nu.density.family and/or "
                "nu.atoms");
    }
    return cfg;
}

inline model_config parse_model_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw validation_error("model config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_config(ss.str());
}

inline model_config fbm_config(double hurst) {
    model_config cfg;
    cfg.entries["builtin"] = "fbm";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", hurst);
    cfg.entries["hurst"] = buf;
    return cfg;
}

inline process_model build_model(const model_config& cfg,
                                 const quad_control& ctl = {}) {
    const hurst_index hurst(detail::parse_number("hurst", cfg.at("hurst")));
    const double h = hurst;

    if (cfg.has("builtin")) {
        process_model m = make_fbm_model(hurst);
        if (cfg.has("name")) m.name = cfg.at("name");
        return m;
    }

    nu_measure nu;
    double c_singularity = 0.0;
    if (cfg.has("nu.density.family")) {
        const std::string& family = cfg.at("nu.density.family");
        if (!cfg.has("nu.density.coeff"))
            throw validation_error(
                "model config: nu.density.family needs nu.density.coeff");
        const double coeff =
            detail::parse_number("nu.density.coeff", cfg.at("nu.density.coeff"));
        if (!(coeff > 0.0))
            throw validation_error(
                "model config: nu.density.coeff must be > 0");
        if (family == "power") {
            if (!cfg.has("nu.density.exponent"))
                throw validation_error(
                    "model config: power density needs nu.density.exponent");
            if (cfg.has("nu.density.rate"))
                throw validation_error(
                    "model config: nu.density.rate applies to the exp "
                    "family only");
            const double p = detail::parse_number("nu.density.exponent",
                                                  cfg.at("nu.density.exponent"));
            // p > -1 makes nu finite near 0, p < -1/2 keeps c square
            // integrable at the origin
            if (!(p > -1.0 && p < -0.5))
                throw validation_error(
                    "model config: nu.density.exponent must lie in "
                    "(-1, -1/2)");
            nu.density = [=](double x) { return coeff * std::pow(x, p); };
            nu.density_singularity = p;
            nu.density_tail = -p;
            c_singularity = -(1.0 + p);
        } else if (family == "exp") {
            if (!cfg.has("nu.density.rate"))
                throw validation_error(
                    "model config: exp density needs nu.density.rate");
            if (cfg.has("nu.density.exponent"))
                throw validation_error(
                    "model config: nu.density.exponent applies to the power "
                    "family only");
            const double rate =
                detail::parse_number("nu.density.rate", cfg.at("nu.density.rate"));
            if (!(rate > 0.0))
                throw validation_error(
                    "model config: nu.density.rate must be > 0");
            nu.density = [=](double x) { return coeff * std::exp(-rate * x); };
        } else {
            throw validation_error(
                "model config: unknown nu.density.family '" + family +
                "' (power or exp)");
        }
    } else {
        for (const char* k : {"nu.density.coeff", "nu.density.exponent",
                              "nu.density.rate"})
            if (cfg.has(k))
                throw validation_error("model config: '" + std::string(k) +
                                       "' needs nu.density.family");
    }
    if (cfg.has("nu.atoms")) nu.atoms = detail::parse_atoms(cfg.at("nu.atoms"));

    double ell = 1.0;
    if (cfg.has("ell")) {
        ell = detail::parse_number("ell", cfg.at("ell"));
        if (!(ell > 0.0))
            throw validation_error("model config: ell must be > 0");
    }

    autoregressive_coefficient a;
    const std::string& a_family = cfg.at("a.family");
    const double a_exponent = 1.5 + h; // pinned by hurst: this is what makes
                                       // the declared index the true one
    if (a_family == "fbm") {
        if (cfg.has("a.coeff"))
            throw validation_error(
                "model config: a.family=fbm takes no a.coeff");
        const double a0 = (0.5 + h) / gamma_fn(0.5 - h);
        a = {[=](double t) { return a0 * std::pow(t, -a_exponent); },
             a_exponent};
    } else if (a_family == "power") {
        if (!cfg.has("a.coeff"))
            throw validation_error(
                "model config: a.family=power needs a.coeff");
        const double a0 = detail::parse_number("a.coeff", cfg.at("a.coeff"));
        if (!(a0 > 0.0))
            throw validation_error("model config: a.coeff must be > 0");
        a = {[=](double t) { return a0 * std::pow(t, -a_exponent); },
             a_exponent};
    } else {
        throw validation_error("model config: unknown a.family '" + a_family +
                               "' (fbm or power)");
    }

    return process_model{
        hurst,
        {[nu, ctl](double t) { return c_from_nu(nu, t, ctl); },
         c_singularity, ell},
        a,
        nullptr,
        nullptr,
        cfg.has("name") ? cfg.at("name") : "custom"};
}

} // namespace fbmbax
