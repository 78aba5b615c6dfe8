#pragma once

// JSON experiment configuration. Unknown keys and wrong types are rejected with the JSON
// pointer of the offending field. The schema is documented in docs/config.md.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ringsync/errors.hpp"
#include "ringsync/experiments.hpp"

namespace ringsync {

namespace detail {

template <typename T>
T get_integer(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    if (v.is_number_unsigned()) {
        if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
            throw ConfigError(path, "integer out of range");
        return static_cast<T>(v.get<std::uint64_t>());
    }
    const auto x = v.get<std::int64_t>();
    if constexpr (std::is_unsigned_v<T>) {
        if (x < 0) throw ConfigError(path, "expected a non-negative integer");
        if (static_cast<std::uint64_t>(x) > std::numeric_limits<T>::max()) throw ConfigError(path, "integer out of range");
    } else {
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
            throw ConfigError(path, "integer out of range");
    }
    return static_cast<T>(x);
}

inline double get_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

inline const nlohmann::json& get_array(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    return v;
}

}  // namespace detail

/// Overlay the fields present in `j` onto `cfg`.
inline void apply_config_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    using detail::get_integer;
    using detail::get_number;
    if (!j.is_object()) throw ConfigError("/", "expected a JSON object");
    if (j.empty()) throw ConfigError("/", "config is empty");
    for (const auto& [key, v] : j.items()) {
        const std::string path = "/" + key;
        if (key == "campaign") {
            if (!v.is_string()) throw ConfigError(path, "expected a string");
            const auto c = parse_campaign(v.get<std::string>());
            if (!c) throw ConfigError(path, "unknown campaign '" + v.get<std::string>() + "'");
            cfg.campaign = *c;
        } else if (key == "n") {
            cfg.n = get_integer<int>(v, path);
        } else if (key == "samples") {
            cfg.samples = get_integer<long>(v, path);
        } else if (key == "h") {
            cfg.h = get_number(v, path);
        } else if (key == "t_end") {
            cfg.t_end = get_number(v, path);
        } else if (key == "seed") {
            cfg.seed = get_integer<std::uint64_t>(v, path);
        } else if (key == "workers") {
            cfg.workers = get_integer<unsigned>(v, path);
        } else if (key == "checkpoints") {
            cfg.checkpoints.clear();
            const auto& arr = detail::get_array(v, path);
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string p = path + "/" + std::to_string(i);
                if (arr[i].is_string() && arr[i].get<std::string>() == "converged") cfg.checkpoints.push_back(kConverged);
                else cfg.checkpoints.push_back(get_number(arr[i], p));
            }
        } else if (key == "n_list") {
            cfg.n_list.clear();
            const auto& arr = detail::get_array(v, path);
            for (std::size_t i = 0; i < arr.size(); ++i)
                cfg.n_list.push_back(get_integer<int>(arr[i], path + "/" + std::to_string(i)));
        } else if (key == "distances") {
            cfg.distances.clear();
            const auto& arr = detail::get_array(v, path);
            for (std::size_t i = 0; i < arr.size(); ++i)
                cfg.distances.push_back(get_integer<int>(arr[i], path + "/" + std::to_string(i)));
        } else if (key == "correlation_index") {
            cfg.correlation_index = get_integer<int>(v, path);
        } else if (key == "h_list") {
            cfg.h_list.clear();
            const auto& arr = detail::get_array(v, path);
            for (std::size_t i = 0; i < arr.size(); ++i)
                cfg.h_list.push_back(get_number(arr[i], path + "/" + std::to_string(i)));
        } else if (key == "h_ref") {
            cfg.h_ref = get_number(v, path);
        } else if (key == "compare_c") {
            cfg.compare_c = get_number(v, path);
        } else if (key == "q_fit_max") {
            cfg.q_fit_max = get_integer<int>(v, path);
        } else if (key == "audit_samples") {
            cfg.audit_samples = get_integer<long>(v, path);
        } else if (key == "audit_t_end") {
            cfg.audit_t_end = get_number(v, path);
        } else if (key == "conv_tol") {
            cfg.conv_tol = get_number(v, path);
        } else if (key == "entry_bin_width") {
            cfg.entry_bin_width = get_number(v, path);
        } else {
            throw ConfigError(path, "unknown field");
        }
    }
}

inline nlohmann::json parse_config_text(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("/", "config is empty");
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
}

inline nlohmann::json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("/", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["campaign"] = std::string(campaign_name(cfg.campaign));
    j["n"] = cfg.n;
    j["samples"] = cfg.samples;
    j["h"] = cfg.h;
    j["t_end"] = cfg.t_end;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    auto cps = nlohmann::json::array();
    for (double t : cfg.checkpoints) {
        if (std::isfinite(t)) cps.push_back(t);
        else cps.push_back("converged");
    }
    j["checkpoints"] = cps;
    j["n_list"] = cfg.n_list;
    j["distances"] = cfg.distances;
    j["correlation_index"] = cfg.correlation_index;
    j["h_list"] = cfg.h_list;
    j["h_ref"] = cfg.h_ref;
    j["compare_c"] = cfg.compare_c;
    j["q_fit_max"] = cfg.q_fit_max;
    j["audit_samples"] = cfg.audit_samples;
    j["audit_t_end"] = cfg.audit_t_end;
    j["conv_tol"] = cfg.conv_tol;
    j["entry_bin_width"] = cfg.entry_bin_width;
    return j;
}

}  // namespace ringsync
