#pragma once

// Serialization of sweep tables and reports: CSV with full-precision fields,
// JSON with metadata, and the config hash that stamps every artifact.
// Output is a pure function of the inputs: no timestamps, no environment.

#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "baxter_analysis.hpp"

namespace fbmbax {

// FNV-1a, 64-bit; stable across platforms for config fingerprinting.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char byte : data) {
        h ^= byte;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

// %.17g round-trips doubles exactly.
inline std::string g17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string sweep_to_csv(const sweep_result& sw) {
    std::string out = "t,lhs,rhs,ratio,asymptote\n";
    for (const auto& r : sw.rows) {
        out += g17(r.t) + ',' + g17(r.lhs) + ',' + g17(r.rhs) + ',' +
               g17(r.ratio) + ',' + g17(r.asymptote) + '\n';
    }
    return out;
}

inline nlohmann::json sweep_to_json(const sweep_result& sw) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : sw.rows)
        rows.push_back({{"t", r.t},
                        {"lhs", r.lhs},
                        {"rhs", r.rhs},
                        {"ratio", r.ratio},
                        {"asymptote", r.asymptote}});
    return {{"model", sw.model_id},
            {"g", sw.g_desc},
            {"horizon", sw.horizon},
            {"hurst", sw.hurst},
            {"rho", sw.rho},
            {"tol", sw.tol},
            {"constant", sw.constant},
            {"m_hat", sw.m_hat},
            {"rows", rows}};
}

} // namespace fbmbax
