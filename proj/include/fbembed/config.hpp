#pragma once

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fbembed/basin.hpp"
#include "fbembed/complex_plane.hpp"
#include "fbembed/embedding.hpp"
#include "fbembed/pusher.hpp"

// Run configuration: a strict JSON schema (unknown keys are errors) mapped
// onto the library's option structs. All sampling inside a run is
// deterministic, so a config fully determines every artifact byte.

namespace fbembed {

struct RenderConfig {
    bool graph = true;  // probe the surface graph; false: the affine z-plane
    int resolution = 256;
    double u_min = -3.0, u_max = 3.0, v_min = -3.0, v_max = 3.0;
    int budget = 0;  // 0: stages + 3
    double escape = 1e6;
};

struct ProbeConfig {
    std::vector<C2Point> points;
    int budget = 16;
    double escape = 1e6;
};

struct PropernessConfig {
    double M = 1e3;
    int k_max = 14;
    Complex base{1.0, 0.0};
    Complex direction{1.0, 0.0};  // approach points base + 2^{-k} * direction
};

struct ClassifyConfig {
    bool present = false;
    DomainSpec spec;
};

struct RunConfig {
    StandardDomain domain = StandardDomain::plane_minus_L();
    int truncation = 0;  // pole-series truncation; defaults to the puncture count
    ContractionParams params;
    InductionOptions opts;
    int steps = 6;
    RenderConfig render;
    ProbeConfig probe;
    PropernessConfig properness;
    ClassifyConfig classify;
};

namespace detail {

using Json = nlohmann::json;

inline void require_keys(const Json& obj, const std::string& section,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key \"" + key + "\" in " + section);
}

inline Complex get_complex(const Json& v, const std::string& what) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("config: " + what + " must be a [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline double get_num(const Json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw ConfigError("config: \"" + key + "\" must be a number");
    return obj[key].get<double>();
}

inline int get_int(const Json& obj, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError("config: \"" + key + "\" must be an integer");
    return obj[key].get<int>();
}

inline void parse_domain(const Json& d, RunConfig& cfg) {
    require_keys(d, "\"domain\"", {"half_line", "punctures"});
    StandardDomain S;
    S.has_half_line = d.value("half_line", true);
    if (d.contains("punctures")) {
        if (!d["punctures"].is_array())
            throw ConfigError("config: \"punctures\" must be an array of [re, im] pairs");
        std::vector<Complex> pts;
        for (const auto& p : d["punctures"]) pts.push_back(get_complex(p, "puncture"));
        if (!pts.empty()) S.punctures = PunctureSet::from_list(pts, "configured punctures");
    }
    validate_standard_domain(S);
    cfg.domain = S;
}

inline void parse_params(const Json& p, RunConfig& cfg) {
    require_keys(p, "\"params\"", {"rho", "delta", "s", "r"});
    cfg.params.rho = get_num(p, "rho", cfg.params.rho);
    cfg.params.delta = get_num(p, "delta", cfg.params.delta);
    cfg.params.s = get_num(p, "s", cfg.params.s);
    cfg.params.r = get_num(p, "r", cfg.params.r);
    cfg.params.validate();  // names the failing invariant, e.g. r^2 < s
}

inline void parse_budgets(const Json& b, RunConfig& cfg) {
    require_keys(b, "\"budgets\"", {"degree", "retry", "push_eps", "curve_samples"});
    cfg.opts.push_budgets.degree_budget =
        get_int(b, "degree", cfg.opts.push_budgets.degree_budget);
    cfg.opts.push_budgets.retry_budget =
        get_int(b, "retry", cfg.opts.push_budgets.retry_budget);
    cfg.opts.push_eps = get_num(b, "push_eps", cfg.opts.push_eps);
    cfg.opts.curve_samples = get_int(b, "curve_samples", cfg.opts.curve_samples);
}

inline void parse_render(const Json& r, RunConfig& cfg) {
    require_keys(r, "\"render\"", {"plane", "resolution", "window", "budget", "escape"});
    if (r.contains("plane")) {
        const std::string plane = r["plane"].get<std::string>();
        if (plane == "graph") cfg.render.graph = true;
        else if (plane == "affine") cfg.render.graph = false;
        else throw ConfigError("config: \"plane\" must be \"graph\" or \"affine\"");
    }
    cfg.render.resolution = get_int(r, "resolution", cfg.render.resolution);
    if (cfg.render.resolution < 16)
        throw ConfigError("config: \"resolution\" must be >= 16");
    if (r.contains("window")) {
        const auto& w = r["window"];
        if (!w.is_array() || w.size() != 4)
            throw ConfigError("config: \"window\" must be [u_min, u_max, v_min, v_max]");
        cfg.render.u_min = w[0].get<double>();
        cfg.render.u_max = w[1].get<double>();
        cfg.render.v_min = w[2].get<double>();
        cfg.render.v_max = w[3].get<double>();
        if (cfg.render.u_min >= cfg.render.u_max || cfg.render.v_min >= cfg.render.v_max)
            throw ConfigError("config: \"window\" must have positive extent");
    }
    cfg.render.budget = get_int(r, "budget", cfg.render.budget);
    cfg.render.escape = get_num(r, "escape", cfg.render.escape);
}

inline void parse_probe(const Json& p, RunConfig& cfg) {
    require_keys(p, "\"probe\"", {"points", "budget", "escape"});
    if (p.contains("points")) {
        for (const auto& pt : p["points"]) {
            if (!pt.is_array() || pt.size() != 4)
                throw ConfigError("config: probe point must be [z_re, z_im, w_re, w_im]");
            cfg.probe.points.push_back(
                {{pt[0].get<double>(), pt[1].get<double>()},
                 {pt[2].get<double>(), pt[3].get<double>()}});
        }
    }
    cfg.probe.budget = get_int(p, "budget", cfg.probe.budget);
    cfg.probe.escape = get_num(p, "escape", cfg.probe.escape);
}

inline void parse_properness(const Json& p, RunConfig& cfg) {
    require_keys(p, "\"properness\"", {"M", "k_max", "base", "direction"});
    cfg.properness.M = get_num(p, "M", cfg.properness.M);
    cfg.properness.k_max = get_int(p, "k_max", cfg.properness.k_max);
    if (p.contains("base")) cfg.properness.base = get_complex(p["base"], "\"base\"");
    if (p.contains("direction"))
        cfg.properness.direction = get_complex(p["direction"], "\"direction\"");
}

inline ComplementComponent parse_component(const Json& c) {
    require_keys(c, "classify component", {"type", "center", "radius", "point", "normal",
                                           "bounded"});
    const std::string type = c.at("type").get<std::string>();
    if (type == "disc")
        return ComplementComponent::disc(get_complex(c.at("center"), "\"center\""),
                                         c.at("radius").get<double>(),
                                         c.value("bounded", true));
    if (type == "point")
        return ComplementComponent::point(get_complex(c.at("point"), "\"point\""));
    if (type == "half_plane")
        return ComplementComponent::half_plane(get_complex(c.at("point"), "\"point\""),
                                               get_complex(c.at("normal"), "\"normal\""));
    throw ConfigError("config: component \"type\" must be disc, point or half_plane");
}

inline void parse_classify(const Json& c, RunConfig& cfg) {
    require_keys(c, "\"classify\"",
                 {"components", "punctures", "limit", "witness_segment"});
    cfg.classify.present = true;
    DomainSpec& spec = cfg.classify.spec;
    if (c.contains("components"))
        for (const auto& comp : c["components"])
            spec.components.push_back(parse_component(comp));
    if (c.contains("punctures")) {
        std::vector<Complex> pts;
        for (const auto& p : c["punctures"]) pts.push_back(get_complex(p, "puncture"));
        spec.punctures = PunctureSet::from_list(pts, "configured punctures");
    }
    if (c.contains("limit")) {
        if (c["limit"].is_string() && c["limit"].get<std::string>() == "inf")
            spec.limit = CPoint::infinity();
        else
            spec.limit = CPoint(get_complex(c["limit"], "\"limit\""));
    } else {
        spec.limit = CPoint::infinity();
    }
    if (c.contains("witness_segment")) {
        const auto& w = c["witness_segment"];
        if (!w.is_array() || w.size() != 2)
            throw ConfigError("config: \"witness_segment\" must be [[re,im], [re,im]]");
        spec.witness = PlanarCurve::segment(get_complex(w[0], "witness endpoint"),
                                            get_complex(w[1], "witness endpoint"));
        spec.has_witness = true;
    }
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    detail::Json root;
    try {
        root = detail::Json::parse(text);
    } catch (const detail::Json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    detail::require_keys(root, "the top level",
                         {"domain", "params", "budgets", "steps", "truncation", "render",
                          "probe", "properness", "classify"});
    RunConfig cfg;
    try {
        if (root.contains("domain")) detail::parse_domain(root["domain"], cfg);
        if (root.contains("params")) detail::parse_params(root["params"], cfg);
        if (root.contains("budgets")) detail::parse_budgets(root["budgets"], cfg);
        cfg.steps = detail::get_int(root, "steps", cfg.steps);
        if (cfg.steps < 1) throw ConfigError("config: \"steps\" must be >= 1");
        cfg.truncation =
            detail::get_int(root, "truncation", cfg.domain.punctures.truncation);
        if (root.contains("render")) detail::parse_render(root["render"], cfg);
        if (root.contains("probe")) detail::parse_probe(root["probe"], cfg);
        if (root.contains("properness")) detail::parse_properness(root["properness"], cfg);
        if (root.contains("classify")) detail::parse_classify(root["classify"], cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace fbembed
