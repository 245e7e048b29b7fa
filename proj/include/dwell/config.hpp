#pragma once

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dwell/core.hpp"

namespace dwell {

/// Full run configuration. Every key has a default; unknown keys are a hard
/// error so typos cannot silently fall back.
struct RunConfig {
    double s = 2.0;
    double L = 6.0;
    std::vector<double> L_list = {4.0, 4.75, 5.5, 6.25, 7.0};
    double lambda = 0.2;
    double kernel_radius = 0.5;
    double kernel_height = 1.0;
    double grid_h = 0.02;
    double grid_trunc_tol = 1e-12;
    long grid_max_points = 2000001;
    double scf_damping = 0.5;
    double scf_tol = 1e-10;
    long scf_max_iter = 500;
    long eig_k = 4;
    std::string eig_method = "dense";
    double eig_tol = 1e-10;
    double dirichlet_c = 0.5;
    double agmon_epsilon = 0.1;
    double agmon_R = 1.0;
    double quasi_c = 0.5;
    bool quasi_sensitivity = false;
    double terms_R = 0.3;
    double sweep_gap2_floor = 1.0;
    long jobs = 0;  // 0 = hardware concurrency
};

namespace detail {

enum class KeyType { real, integer, boolean, text, real_list };

struct KeyEntry {
    KeyType type;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw error(format("type mismatch: key '%s' expects a real, got '%s'", key.c_str(),
                           v.c_str()));
    }
}

inline long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw error(format("type mismatch: key '%s' expects an integer, got '%s'",
                           key.c_str(), v.c_str()));
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw error(format("type mismatch: key '%s' expects true|false, got '%s'", key.c_str(),
                       v.c_str()));
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) {
        const size_t b = item.find_first_not_of(" \t");
        const size_t e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_real(key, item.substr(b, e - b + 1)));
    }
    if (out.empty())
        throw error(format("type mismatch: key '%s' expects a list of reals", key.c_str()));
    return out;
}

inline std::string list_to_string(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += num17(v[i]);
    }
    return s;
}

inline const std::map<std::string, KeyEntry>& key_table() {
    static const std::map<std::string, KeyEntry> table = [] {
        std::map<std::string, KeyEntry> t;
        auto real_key = [&](const std::string& name, double RunConfig::* field) {
            t[name] = KeyEntry{KeyType::real,
                               [name, field](RunConfig& c, const std::string& v) {
                                   c.*field = parse_real(name, v);
                               },
                               [field](const RunConfig& c) { return num17(c.*field); }};
        };
        auto int_key = [&](const std::string& name, long RunConfig::* field) {
            t[name] = KeyEntry{KeyType::integer,
                               [name, field](RunConfig& c, const std::string& v) {
                                   c.*field = parse_int(name, v);
                               },
                               [field](const RunConfig& c) { return std::to_string(c.*field); }};
        };
        real_key("s", &RunConfig::s);
        real_key("L", &RunConfig::L);
        t["L_list"] = KeyEntry{KeyType::real_list,
                               [](RunConfig& c, const std::string& v) {
                                   c.L_list = parse_real_list("L_list", v);
                               },
                               [](const RunConfig& c) { return list_to_string(c.L_list); }};
        real_key("lambda", &RunConfig::lambda);
        real_key("kernel.radius", &RunConfig::kernel_radius);
        real_key("kernel.height", &RunConfig::kernel_height);
        real_key("grid.h", &RunConfig::grid_h);
        real_key("grid.trunc_tol", &RunConfig::grid_trunc_tol);
        int_key("grid.max_points", &RunConfig::grid_max_points);
        real_key("scf.damping", &RunConfig::scf_damping);
        real_key("scf.tol", &RunConfig::scf_tol);
        int_key("scf.max_iter", &RunConfig::scf_max_iter);
        int_key("eig.k", &RunConfig::eig_k);
        t["eig.method"] = KeyEntry{KeyType::text,
                                   [](RunConfig& c, const std::string& v) {
                                       if (v != "dense" && v != "iterative" && v != "both")
                                           throw error(format(
                                               "type mismatch: eig.method must be "
                                               "dense|iterative|both, got '%s'",
                                               v.c_str()));
                                       c.eig_method = v;
                                   },
                                   [](const RunConfig& c) { return c.eig_method; }};
        real_key("eig.tol", &RunConfig::eig_tol);
        real_key("dirichlet.c", &RunConfig::dirichlet_c);
        real_key("agmon.epsilon", &RunConfig::agmon_epsilon);
        real_key("agmon.R", &RunConfig::agmon_R);
        real_key("quasi.c", &RunConfig::quasi_c);
        t["quasi.sensitivity"] =
            KeyEntry{KeyType::boolean,
                     [](RunConfig& c, const std::string& v) {
                         c.quasi_sensitivity = parse_bool("quasi.sensitivity", v);
                     },
                     [](const RunConfig& c) {
                         return std::string(c.quasi_sensitivity ? "true" : "false");
                     }};
        real_key("terms.R", &RunConfig::terms_R);
        real_key("sweep.gap2_floor", &RunConfig::sweep_gap2_floor);
        int_key("jobs", &RunConfig::jobs);
        return t;
    }();
    return table;
}

}  // namespace detail

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = detail::key_table();
    const auto it = table.find(key);
    if (it == table.end()) throw error(format("unknown key '%s'", key.c_str()));
    it->second.set(cfg, value);
}

inline void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw error(format("%s:%d: expected key = value", origin.c_str(), lineno));
        auto trim = [](std::string s) {
            const size_t x = s.find_first_not_of(" \t\r");
            if (x == std::string::npos) return std::string();
            const size_t y = s.find_last_not_of(" \t\r");
            return s.substr(x, y - x + 1);
        };
        apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

/// Defaults, overlaid by the config file, overlaid by key=value overrides.
inline RunConfig parse_config(const std::string& file_path,
                              const std::vector<std::string>& overrides = {}) {
    RunConfig cfg;
    if (!file_path.empty()) {
        std::ifstream in(file_path);
        if (!in) throw error(format("missing file: %s", file_path.c_str()));
        apply_config_text(cfg, in, file_path);
    }
    for (const std::string& ov : overrides) {
        const size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw error(format("override '%s' must have the form key=value", ov.c_str()));
        apply_key(cfg, ov.substr(0, eq), ov.substr(eq + 1));
    }
    return cfg;
}

/// Serialized echo; feeding it back through parse_config reproduces the config.
inline std::string config_echo(const RunConfig& cfg) {
    std::string out;
    for (const auto& [name, entry] : detail::key_table())
        out += name + " = " + entry.get(cfg) + "\n";
    return out;
}

}  // namespace dwell
