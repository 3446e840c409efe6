#include "weylscat/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace weylscat {

namespace {

using njson = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw config_error(where + ": " + what);
}

void reject_unknown(const njson& obj,
                    std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) fail(where, "unknown key \"" + it.key() + "\"");
    }
}

const njson& need(const njson& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(where, "must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
    return *it;
}

double need_number(const njson& obj, const char* key,
                   const std::string& where) {
    const njson& v = need(obj, key, where);
    if (!v.is_number())
        fail(where, std::string("key \"") + key + "\" must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        fail(where, std::string("key \"") + key + "\" must be finite");
    return x;
}

int need_int(const njson& obj, const char* key, const std::string& where) {
    const njson& v = need(obj, key, where);
    if (!v.is_number_integer())
        fail(where, std::string("key \"") + key + "\" must be an integer");
    return v.get<int>();
}

bool need_bool(const njson& obj, const char* key, const std::string& where) {
    const njson& v = need(obj, key, where);
    if (!v.is_boolean())
        fail(where, std::string("key \"") + key + "\" must be a boolean");
    return v.get<bool>();
}

std::vector<double> number_array(const njson& v, const char* key,
                                 const std::string& where) {
    if (!v.is_array())
        fail(where, std::string("key \"") + key + "\" must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const njson& e : v) {
        if (!e.is_number())
            fail(where, std::string("key \"") + key +
                            "\" must contain only numbers");
        const double x = e.get<double>();
        if (!std::isfinite(x))
            fail(where, std::string("key \"") + key +
                            "\" must contain only finite numbers");
        out.push_back(x);
    }
    return out;
}

segment parse_segment(const njson& j, const std::string& where) {
    if (!j.is_object()) fail(where, "must be an object");
    reject_unknown(j, {"width", "m", "v"}, where);
    segment seg;
    seg.width = need_number(j, "width", where);
    if (seg.width <= 0.0) fail(where, "width must be > 0");
    const njson& m = need(j, "m", where);
    const njson& v = need(j, "v", where);
    if (m.is_number() != v.is_number())
        fail(where, "keys \"m\" and \"v\" must both be numbers or both arrays");
    if (m.is_number()) {
        constant_coeff cc;
        cc.m = need_number(j, "m", where);
        cc.v = need_number(j, "v", where);
        seg.coeff = cc;
    } else {
        sampled_coeff sc;
        sc.m = number_array(m, "m", where);
        sc.v = number_array(v, "v", where);
        if (sc.m.size() < 2 || sc.v.size() < 2)
            fail(where, "sampled coefficients need at least 2 samples");
        seg.coeff = sc;
    }
    return seg;
}

coefficient_profile parse_profile(const njson& j, const std::string& where) {
    if (!j.is_object()) fail(where, "must be an object");
    reject_unknown(j, {"x_a", "x_b", "segments"}, where);
    const double x_a = need_number(j, "x_a", where);
    const double x_b = need_number(j, "x_b", where);
    const njson& segs = need(j, "segments", where);
    if (!segs.is_array() || segs.empty())
        fail(where, "key \"segments\" must be a non-empty array");
    std::vector<segment> parsed;
    parsed.reserve(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i)
        parsed.push_back(parse_segment(
            segs[i], where + ".segments[" + std::to_string(i) + "]"));
    return coefficient_profile(x_a, x_b, std::move(parsed));
}

lead_spec parse_lead(const njson& j, lead_side side, const std::string& where) {
    if (!j.is_object()) fail(where, "must be an object");
    reject_unknown(j, {"m", "v", "transition"}, where);
    lead_spec lead;
    lead.side = side;
    lead.tail_m = need_number(j, "m", where);
    if (lead.tail_m <= 0.0) fail(where, "m must be > 0");
    lead.tail_v = need_number(j, "v", where);
    if (auto it = j.find("transition"); it != j.end())
        lead.transition = parse_profile(*it, where + ".transition");
    validate_lead(lead);
    return lead;
}

std::vector<double> parse_grid(const njson& j) {
    const std::string where = "grid";
    if (!j.is_object()) fail(where, "must be an object");
    reject_unknown(j, {"start", "stop", "count", "values"}, where);
    const bool ranged = j.contains("start") || j.contains("stop") ||
                        j.contains("count");
    const bool listed = j.contains("values");
    if (ranged == listed)
        fail(where, "provide either start/stop/count or values");
    if (listed) {
        std::vector<double> grid = number_array(j.at("values"), "values", where);
        if (grid.empty()) fail(where, "key \"values\" must not be empty");
        return grid;
    }
    const double start = need_number(j, "start", where);
    const double stop = need_number(j, "stop", where);
    const int count = need_int(j, "count", where);
    if (count < 1) fail(where, "count must be >= 1");
    if (count > 1 && !(start < stop)) fail(where, "start must be < stop");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] =
            count == 1 ? start : start + (stop - start) * i / (count - 1);
    return grid;
}

}  // namespace

sweep_config parse_config(const std::string& text) {
    njson doc;
    try {
        doc = njson::parse(text);
    } catch (const njson::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("config: root must be an object");
    reject_unknown(doc, {"interval", "segments", "leads", "grid", "options"},
                   "config");

    const njson& interval = need(doc, "interval", "config");
    reject_unknown(interval, {"x_l", "x_r"}, "interval");
    const double x_l = need_number(interval, "x_l", "interval");
    const double x_r = need_number(interval, "x_r", "interval");
    if (!(x_l < x_r)) throw config_error("interval: x_l must be < x_r");

    const njson& segs = need(doc, "segments", "config");
    if (!segs.is_array() || segs.empty())
        throw config_error("config: key \"segments\" must be a non-empty array");
    std::vector<segment> parsed;
    parsed.reserve(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i)
        parsed.push_back(
            parse_segment(segs[i], "segments[" + std::to_string(i) + "]"));

    const njson& leads = need(doc, "leads", "config");
    reject_unknown(leads, {"left", "right"}, "leads");

    sweep_config cfg{
        scatter_system{
            coefficient_profile(x_l, x_r, std::move(parsed)),
            parse_lead(need(leads, "left", "leads"), lead_side::left,
                       "leads.left"),
            parse_lead(need(leads, "right", "leads"), lead_side::right,
                       "leads.right")},
        parse_grid(need(doc, "grid", "config")),
    };

    if (auto it = doc.find("options"); it != doc.end()) {
        const njson& opt = *it;
        const std::string where = "options";
        reject_unknown(opt,
                       {"n_series_terms", "series_tol", "mesh_nodes",
                        "compare_series", "diagnostics"},
                       where);
        if (opt.contains("n_series_terms")) {
            cfg.n_series_terms = need_int(opt, "n_series_terms", where);
            if (cfg.n_series_terms < 1)
                fail(where, "n_series_terms must be >= 1");
        }
        if (opt.contains("series_tol")) {
            cfg.series_tol = need_number(opt, "series_tol", where);
            if (!(cfg.series_tol > 0.0)) fail(where, "series_tol must be > 0");
        }
        if (opt.contains("mesh_nodes")) {
            cfg.mesh_nodes = need_int(opt, "mesh_nodes", where);
            if (cfg.mesh_nodes < 16) fail(where, "mesh_nodes must be >= 16");
        }
        if (opt.contains("compare_series"))
            cfg.compare_series = need_bool(opt, "compare_series", where);
        if (opt.contains("diagnostics"))
            cfg.diagnostics = need_bool(opt, "diagnostics", where);
    }
    return cfg;
}

sweep_config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("config: cannot read file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_digest(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx",
                  static_cast<unsigned long long>(h));
    return out;
}

}  // namespace weylscat
