#pragma once

// Versioned text persistence for a solve result. Layout:
//
//   invlab-policy v1
//   params c=<r> c_h=<r> c_p=<r> q=<r> n=<int> x0=<r>
//   demand family=<name> a=<r> b=<r> mode=<r> a2=<r> b2=<r> w1=<r> M=<int>
//   grid x_lo=<r> x_hi=<r> h=<r> count=<int>
//   n0 <int>
//   bounds lower=<r> upper=<r>
//   policy
//   <k>,<active|passive>,<level-or-empty>      (one row per k = 1..n)
//   values
//   <k>,<v_0>,<v_1>,...                        (one row per k = 0..n)
//
// Reals are written with shortest round-trip formatting, so loading restores
// every double bit-for-bit.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "invlab/demand.hpp"
#include "invlab/model.hpp"
#include "invlab/solver.hpp"

namespace invlab {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error("bad real value '" + std::string(s) + "'");
    return v;
}

struct StoredSolve {
    ModelParams params;
    DemandSpec demand;
    SolveResult result;
};

namespace detail {

inline std::map<std::string, std::string> parse_kv(std::istringstream& iss) {
    std::map<std::string, std::string> kv;
    std::string tok;
    while (iss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::runtime_error("expected key=value, got '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

inline DemandFamily family_from_string(const std::string& s) {
    if (s == "uniform") return DemandFamily::Uniform;
    if (s == "triangular") return DemandFamily::Triangular;
    if (s == "polybump") return DemandFamily::PolyBump;
    if (s == "uniform_mixture") return DemandFamily::UniformMixture;
    throw std::runtime_error("unknown demand family '" + s + "'");
}

}  // namespace detail

inline void save_policy(std::ostream& os, const ModelParams& p, const DemandSpec& ds,
                        const SolveResult& res) {
    const auto& pol = res.policy;
    const auto& vg = res.values;
    os << "invlab-policy v1\n";
    os << "params c=" << format_double(p.c) << " c_h=" << format_double(p.c_h)
       << " c_p=" << format_double(p.c_p) << " q=" << format_double(p.q) << " n=" << p.n
       << " x0=" << format_double(p.x0) << "\n";
    os << "demand family=" << to_string(ds.family) << " a=" << format_double(ds.a)
       << " b=" << format_double(ds.b) << " mode=" << format_double(ds.mode)
       << " a2=" << format_double(ds.a2) << " b2=" << format_double(ds.b2)
       << " w1=" << format_double(ds.w1) << " M=" << ds.M << "\n";
    os << "grid x_lo=" << format_double(vg.grid.x_lo) << " x_hi=" << format_double(vg.grid.x_hi)
       << " h=" << format_double(vg.grid.h) << " count=" << vg.grid.count << "\n";
    os << "n0 " << pol.n0 << "\n";
    os << "bounds lower=" << format_double(pol.bounds.lower_first_level)
       << " upper=" << format_double(pol.bounds.upper_limit_level) << "\n";
    os << "policy\n";
    for (int k = 1; k <= pol.n; ++k) {
        const auto& row = pol.by_remaining(k);
        os << k << ',' << (row.active ? "active" : "passive") << ',';
        if (row.active) os << format_double(row.level);
        os << "\n";
    }
    os << "values\n";
    for (std::size_t k = 0; k < vg.v.size(); ++k) {
        os << k;
        for (double v : vg.v[k]) os << ',' << format_double(v);
        os << "\n";
    }
}

inline void save_policy_file(const std::string& path, const ModelParams& p,
                             const DemandSpec& ds, const SolveResult& res) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_policy(os, p, ds, res);
}

inline StoredSolve load_policy(std::istream& is) {
    StoredSolve out;
    std::string line;
    if (!std::getline(is, line) || line != "invlab-policy v1")
        throw std::runtime_error("policy file: bad or missing header");

    auto expect_section = [&](const std::string& name) {
        if (!std::getline(is, line)) throw std::runtime_error("policy file: truncated");
        std::istringstream iss(line);
        std::string head;
        iss >> head;
        if (head != name) throw std::runtime_error("policy file: expected section '" + name + "'");
        return iss;
    };

    {
        auto iss = expect_section("params");
        auto kv = detail::parse_kv(iss);
        out.params.c = parse_double(kv.at("c"));
        out.params.c_h = parse_double(kv.at("c_h"));
        out.params.c_p = parse_double(kv.at("c_p"));
        out.params.q = parse_double(kv.at("q"));
        out.params.n = std::stoi(kv.at("n"));
        out.params.x0 = parse_double(kv.at("x0"));
    }
    {
        auto iss = expect_section("demand");
        auto kv = detail::parse_kv(iss);
        out.demand.family = detail::family_from_string(kv.at("family"));
        out.demand.a = parse_double(kv.at("a"));
        out.demand.b = parse_double(kv.at("b"));
        out.demand.mode = parse_double(kv.at("mode"));
        out.demand.a2 = parse_double(kv.at("a2"));
        out.demand.b2 = parse_double(kv.at("b2"));
        out.demand.w1 = parse_double(kv.at("w1"));
        out.demand.M = std::stoi(kv.at("M"));
    }
    {
        auto iss = expect_section("grid");
        auto kv = detail::parse_kv(iss);
        out.result.values.grid.x_lo = parse_double(kv.at("x_lo"));
        out.result.values.grid.x_hi = parse_double(kv.at("x_hi"));
        out.result.values.grid.h = parse_double(kv.at("h"));
        out.result.values.grid.count = static_cast<std::size_t>(std::stoul(kv.at("count")));
    }
    {
        if (!std::getline(is, line)) throw std::runtime_error("policy file: truncated");
        std::istringstream iss(line);
        std::string head;
        iss >> head;
        if (head != "n0") throw std::runtime_error("policy file: expected section 'n0'");
        iss >> out.result.policy.n0;
    }
    {
        auto iss = expect_section("bounds");
        auto kv = detail::parse_kv(iss);
        out.result.policy.bounds.lower_first_level = parse_double(kv.at("lower"));
        out.result.policy.bounds.upper_limit_level = parse_double(kv.at("upper"));
    }

    PolicyTable& pol = out.result.policy;
    pol.n = out.params.n;
    pol.x_lo = out.result.values.grid.x_lo;
    pol.s_cap = out.result.values.grid.x_hi;
    pol.h = out.result.values.grid.h;
    pol.rows.resize(static_cast<std::size_t>(pol.n));

    if (!std::getline(is, line) || line != "policy")
        throw std::runtime_error("policy file: expected 'policy' section");
    for (int k = 1; k <= pol.n; ++k) {
        if (!std::getline(is, line)) throw std::runtime_error("policy file: truncated policy rows");
        std::istringstream iss(line);
        std::string kf, mode, level;
        std::getline(iss, kf, ',');
        std::getline(iss, mode, ',');
        std::getline(iss, level);
        if (std::stoi(kf) != k) throw std::runtime_error("policy file: rows out of order");
        auto& row = pol.rows[static_cast<std::size_t>(k - 1)];
        row.active = (mode == "active");
        row.level = row.active ? parse_double(level) : 0.0;
    }

    if (!std::getline(is, line) || line != "values")
        throw std::runtime_error("policy file: expected 'values' section");
    out.result.values.v.assign(static_cast<std::size_t>(pol.n) + 1, {});
    for (int k = 0; k <= pol.n; ++k) {
        if (!std::getline(is, line)) throw std::runtime_error("policy file: truncated value rows");
        std::istringstream iss(line);
        std::string cell;
        std::getline(iss, cell, ',');
        if (std::stoi(cell) != k) throw std::runtime_error("policy file: value rows out of order");
        auto& row = out.result.values.v[static_cast<std::size_t>(k)];
        row.reserve(out.result.values.grid.count);
        while (std::getline(iss, cell, ',')) row.push_back(parse_double(cell));
        if (row.size() != out.result.values.grid.count)
            throw std::runtime_error("policy file: value row width mismatch");
    }
    out.result.expected_cost =
        out.result.values.grid.interp(out.result.values.v.back(), out.params.x0);
    return out;
}

inline StoredSolve load_policy_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return load_policy(is);
}

}  // namespace invlab
