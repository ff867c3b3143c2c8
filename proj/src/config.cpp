#include "wgres/config.hpp"
#include "wgres/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wgres {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
    return j[key].get<double>();
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, "top level", {"strip", "trap", "placement", "numerics", "sweep", "output"});

    RunConfig c;
    if (j.contains("strip")) {
        const auto& s = j["strip"];
        check_keys(s, "strip", {"d", "depth", "segments"});
        c.strip.d = get_num(s, "d", c.strip.d);
        c.strip.depth = get_num(s, "depth", c.strip.depth);
        if (s.contains("segments")) {
            for (const auto& seg : s["segments"]) {
                check_keys(seg, "strip.segments[]", {"from", "to", "depth"});
                c.strip.segments.push_back({seg.at("from").get<double>(),
                                            seg.at("to").get<double>(),
                                            seg.at("depth").get<double>()});
            }
        }
    }
    if (j.contains("trap")) {
        const auto& t = j["trap"];
        check_keys(t, "trap",
                   {"kind", "beta", "radius", "width", "height", "length", "points"});
        if (t.contains("kind")) c.trap.kind = t["kind"].get<std::string>();
        c.trap.beta = get_num(t, "beta", c.trap.beta);
        c.trap.radius = get_num(t, "radius", c.trap.radius);
        c.trap.width = get_num(t, "width", c.trap.width);
        c.trap.height = get_num(t, "height", c.trap.height);
        c.trap.length = get_num(t, "length", c.trap.length);
        if (t.contains("points")) {
            for (const auto& p : t["points"])
                c.trap.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        static const std::set<std::string> kinds{"disk", "rectangle", "segment", "circle",
                                                 "polyline"};
        if (!kinds.count(c.trap.kind))
            throw ConfigError("config: trap.kind must be one of disk|rectangle|segment|circle|"
                              "polyline");
    }
    if (j.contains("placement")) {
        const auto& p = j["placement"];
        check_keys(p, "placement", {"rho", "x1", "side"});
        c.placement.rho = get_num(p, "rho", c.placement.rho);
        c.placement.x1 = get_num(p, "x1", c.placement.x1);
        if (p.contains("side")) c.placement.side = p["side"].get<std::string>();
        if (c.placement.side != "below" && c.placement.side != "above")
            throw ConfigError("config: placement.side must be below or above");
        if (c.placement.rho <= 0.0) throw ConfigError("config: placement.rho must be positive");
    }
    if (j.contains("numerics")) {
        const auto& n = j["numerics"];
        check_keys(n, "numerics",
                   {"order", "trap_tol", "pole_tol", "rc_tol", "neighborhood",
                    "regime_threshold", "trap_window"});
        if (n.contains("order")) c.numerics.order = n["order"].get<int>();
        c.numerics.trap_tol = get_num(n, "trap_tol", c.numerics.trap_tol);
        c.numerics.pole_tol = get_num(n, "pole_tol", c.numerics.pole_tol);
        c.numerics.rc_tol = get_num(n, "rc_tol", c.numerics.rc_tol);
        c.numerics.neighborhood = get_num(n, "neighborhood", c.numerics.neighborhood);
        c.numerics.regime_threshold =
            get_num(n, "regime_threshold", c.numerics.regime_threshold);
        if (n.contains("trap_window")) {
            c.numerics.trap_window = {n["trap_window"].at(0).get<double>(),
                                      n["trap_window"].at(1).get<double>()};
        }
        if (c.numerics.order < 2) throw ConfigError("config: numerics.order must be >= 2");
        for (double tol : {c.numerics.trap_tol, c.numerics.pole_tol, c.numerics.rc_tol})
            if (!(tol > 0.0)) throw ConfigError("config: tolerances must be positive");
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "sweep", {"rho_min", "rho_max", "points", "spacing"});
        c.sweep.rho_min = get_num(s, "rho_min", c.sweep.rho_min);
        c.sweep.rho_max = get_num(s, "rho_max", c.sweep.rho_max);
        if (s.contains("points")) c.sweep.points = s["points"].get<int>();
        if (s.contains("spacing")) c.sweep.spacing = s["spacing"].get<std::string>();
        if (!(c.sweep.rho_min > 0.0) || c.sweep.rho_max < c.sweep.rho_min)
            throw ConfigError("config: sweep range must satisfy 0 < rho_min <= rho_max");
        if (c.sweep.points < 1) throw ConfigError("config: sweep.points must be >= 1");
        if (c.sweep.spacing != "geometric" && c.sweep.spacing != "linear")
            throw ConfigError("config: sweep.spacing must be geometric or linear");
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        check_keys(o, "output", {"directory", "formats"});
        if (o.contains("directory")) c.output.directory = o["directory"].get<std::string>();
        if (o.contains("formats")) {
            c.output.formats.clear();
            for (const auto& f : o["formats"]) {
                std::string fmt = f.get<std::string>();
                if (fmt != "csv" && fmt != "json")
                    throw ConfigError("config: output.formats entries must be csv or json");
                c.output.formats.push_back(fmt);
            }
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json config_to_json(const RunConfig& c, bool include_variable_parts) {
    json j;
    j["strip"]["d"] = c.strip.d;
    j["strip"]["depth"] = c.strip.depth;
    if (!c.strip.segments.empty()) {
        json segs = json::array();
        for (const auto& s : c.strip.segments)
            segs.push_back({{"from", s.x0}, {"to", s.x1}, {"depth", s.depth}});
        j["strip"]["segments"] = segs;
    }
    j["trap"]["kind"] = c.trap.kind;
    j["trap"]["beta"] = c.trap.beta;
    if (c.trap.kind == "disk" || c.trap.kind == "circle") j["trap"]["radius"] = c.trap.radius;
    if (c.trap.kind == "rectangle") {
        j["trap"]["width"] = c.trap.width;
        j["trap"]["height"] = c.trap.height;
    }
    if (c.trap.kind == "segment") j["trap"]["length"] = c.trap.length;
    if (c.trap.kind == "polyline") {
        json pts = json::array();
        for (const auto& p : c.trap.points) pts.push_back({p[0], p[1]});
        j["trap"]["points"] = pts;
    }
    j["placement"]["x1"] = c.placement.x1;
    j["placement"]["side"] = c.placement.side;
    j["numerics"]["order"] = c.numerics.order;
    j["numerics"]["trap_tol"] = c.numerics.trap_tol;
    j["numerics"]["pole_tol"] = c.numerics.pole_tol;
    j["numerics"]["rc_tol"] = c.numerics.rc_tol;
    j["numerics"]["neighborhood"] = c.numerics.neighborhood;
    j["numerics"]["regime_threshold"] = c.numerics.regime_threshold;
    if (c.numerics.trap_window[0] != 0.0 || c.numerics.trap_window[1] != 0.0)
        j["numerics"]["trap_window"] = {c.numerics.trap_window[0], c.numerics.trap_window[1]};
    if (include_variable_parts) {
        j["placement"]["rho"] = c.placement.rho;
        j["sweep"]["rho_min"] = c.sweep.rho_min;
        j["sweep"]["rho_max"] = c.sweep.rho_max;
        j["sweep"]["points"] = c.sweep.points;
        j["sweep"]["spacing"] = c.sweep.spacing;
        j["output"]["directory"] = c.output.directory;
        j["output"]["formats"] = c.output.formats;
    }
    return j;
}

} // namespace

std::string serialize_config(const RunConfig& config) {
    return config_to_json(config, true).dump(2);
}

std::uint64_t config_hash(const RunConfig& config) {
    std::string canonical = config_to_json(config, false).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

TransverseProfile make_profile(const RunConfig& config) {
    TransverseProfile profile;
    profile.d = config.strip.d;
    if (config.strip.segments.empty()) {
        profile = TransverseProfile::constant(config.strip.depth, config.strip.d);
    } else {
        profile.segments = config.strip.segments;
    }
    profile.validate();
    return profile;
}

KatoMeasure make_trap(const RunConfig& config, double rho) {
    if (!(rho > 0.0)) throw ConfigError("make_trap: rho must be positive");
    const auto& t = config.trap;
    const double x1 = config.placement.x1;
    const bool below = config.placement.side == "below";
    const double d = config.strip.d;
    auto depth_to_center = [&](double half_height) {
        return below ? -(rho + half_height) : d + rho + half_height;
    };
    KatoMeasure m;
    if (t.kind == "disk") {
        m = disk_measure(x1, depth_to_center(t.radius), t.radius, config.numerics.order);
    } else if (t.kind == "circle") {
        m = circle_measure(x1, depth_to_center(t.radius), t.radius, config.numerics.order);
    } else if (t.kind == "rectangle") {
        double c2 = depth_to_center(0.5 * t.height);
        m = rectangle_measure(x1 - 0.5 * t.width, x1 + 0.5 * t.width, c2 - 0.5 * t.height,
                              c2 + 0.5 * t.height, config.numerics.order);
    } else if (t.kind == "segment") {
        double y = below ? -rho : d + rho;
        m = polyline_measure({{x1 - 0.5 * t.length, y}, {x1 + 0.5 * t.length, y}},
                             4 * config.numerics.order);
    } else if (t.kind == "polyline") {
        if (t.points.size() < 2) throw ConfigError("make_trap: polyline needs >= 2 points");
        // points are relative depths: x2 entries measure outward distance
        std::vector<std::array<double, 2>> pts;
        for (const auto& p : t.points) {
            if (p[1] < 0.0) throw ConfigError("make_trap: polyline depths must be >= 0");
            double y = below ? -(rho + p[1]) : d + rho + p[1];
            pts.push_back({x1 + p[0], y});
        }
        m = polyline_measure(pts, 4 * config.numerics.order);
    } else {
        throw ConfigError("make_trap: unsupported trap kind " + t.kind);
    }
    double got = distance_to_strip(m, d);
    if (std::abs(got - rho) > 1e-9 * std::max(1.0, rho))
        throw GeometryError("make_trap: inconsistent trap placement");
    return m;
}

std::vector<double> sweep_grid(const RunConfig& config) {
    const auto& s = config.sweep;
    std::vector<double> grid;
    if (s.points == 1) {
        grid.push_back(s.rho_min);
        return grid;
    }
    for (int i = 0; i < s.points; ++i) {
        double t = static_cast<double>(i) / (s.points - 1);
        if (s.spacing == "geometric") {
            grid.push_back(s.rho_min * std::pow(s.rho_max / s.rho_min, t));
        } else {
            grid.push_back(s.rho_min + (s.rho_max - s.rho_min) * t);
        }
    }
    return grid;
}

} // namespace wgres
