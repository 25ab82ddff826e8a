#include "stz/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "stz/errors.hpp"

namespace stz {

using nlohmann::json;

std::string to_string(WindowScheme s) {
    switch (s) {
        case WindowScheme::Full: return "Full";
        case WindowScheme::Segment: return "Segment";
        case WindowScheme::Season: return "Season";
        case WindowScheme::Month: return "Month";
    }
    return "Full";
}

std::filesystem::path PipelineConfig::resolve(const std::filesystem::path& p) const {
    if (p.empty() || p.is_absolute()) return p;
    return base_dir / p;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get(const json& obj, const std::string& key, const T& fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

Mode mode_from(const std::string& s) {
    const auto m = parse_mode(s);
    if (!m) throw ConfigError("unknown mode '" + s + "'");
    return *m;
}

WindowScheme scheme_from(const std::string& s) {
    for (auto w : {WindowScheme::Full, WindowScheme::Segment, WindowScheme::Season, WindowScheme::Month}) {
        if (to_string(w) == s) return w;
    }
    throw ConfigError("unknown window scheme '" + s + "'");
}

DateRange range_from(const json& j) {
    check_keys(j, {"first", "last"}, "date range");
    if (!j.contains("first") || !j.contains("last")) throw ConfigError("date range needs 'first' and 'last'");
    DateRange r{require_date(get<std::string>(j, "first", "")), require_date(get<std::string>(j, "last", ""))};
    if (r.last < r.first) throw ConfigError("date range ends before it starts");
    return r;
}

json range_to(const DateRange& r) { return {{"first", format_date(r.first)}, {"last", format_date(r.last)}}; }

}  // namespace

PipelineConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc,
               {"trips", "geometry", "covariates", "exogenous", "output_dir", "schema", "zone_id_property",
                "study_window", "week_anchor", "modes", "gaps", "low_volume_threshold", "seasonal_period",
                "order_caps", "min_weeks", "lag", "alpha", "fitted_df", "mlr_exogenous", "n_perm", "weights",
                "alternative", "windows", "seed", "threads"},
               "config");
    PipelineConfig c;
    c.base_dir = base_dir;
    for (const char* key : {"trips", "geometry", "covariates", "study_window"}) {
        if (!doc.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
    }
    c.trips = get<std::string>(doc, "trips", "");
    c.geometry = get<std::string>(doc, "geometry", "");
    c.covariates = get<std::string>(doc, "covariates", "");
    c.exogenous = get<std::string>(doc, "exogenous", "");
    c.output_dir = get<std::string>(doc, "output_dir", c.output_dir.string());

    if (doc.contains("schema")) {
        const json& s = doc["schema"];
        check_keys(s, {"zone_column", "date_column", "mode_column", "count_column", "fixed_mode", "delimiter"},
                   "schema");
        c.schema.zone_column = get<std::string>(s, "zone_column", c.schema.zone_column);
        c.schema.date_column = get<std::string>(s, "date_column", c.schema.date_column);
        c.schema.mode_column = get<std::string>(s, "mode_column", c.schema.mode_column);
        c.schema.count_column = get<std::string>(s, "count_column", c.schema.count_column);
        if (s.contains("fixed_mode")) c.schema.fixed_mode = mode_from(get<std::string>(s, "fixed_mode", ""));
        const auto delim = get<std::string>(s, "delimiter", ",");
        if (delim.size() != 1) throw ConfigError("schema delimiter must be one character");
        c.schema.delimiter = delim[0];
    }
    c.zone_id_property = get<std::string>(doc, "zone_id_property", c.zone_id_property);
    c.study_window = range_from(doc["study_window"]);
    if (doc.contains("week_anchor")) {
        const auto wd = parse_weekday(get<std::string>(doc, "week_anchor", ""));
        if (!wd) throw ConfigError("week_anchor must be a weekday name");
        c.week_anchor = *wd;
    }
    if (doc.contains("modes")) {
        c.modes.clear();
        for (const auto& m : get<std::vector<std::string>>(doc, "modes", {})) c.modes.push_back(mode_from(m));
        if (c.modes.empty()) throw ConfigError("modes must not be empty");
    }
    if (doc.contains("gaps")) {
        if (!doc["gaps"].is_array()) throw ConfigError("gaps must be an array");
        for (const auto& g : doc["gaps"]) {
            check_keys(g, {"zone_id", "mode", "date_ranges"}, "gap declaration");
            GapDeclaration gap;
            gap.zone_id = get<std::string>(g, "zone_id", "*");
            gap.mode = mode_from(get<std::string>(g, "mode", ""));
            if (!g.contains("date_ranges") || !g["date_ranges"].is_array()) {
                throw ConfigError("gap declaration needs a date_ranges array");
            }
            for (const auto& r : g["date_ranges"]) gap.ranges.push_back(range_from(r));
            c.gaps.push_back(std::move(gap));
        }
    }
    c.low_volume_threshold = get<double>(doc, "low_volume_threshold", c.low_volume_threshold);
    c.seasonal_period = get<int>(doc, "seasonal_period", c.seasonal_period);
    if (c.seasonal_period < 1) throw ConfigError("seasonal_period must be at least 1");
    if (doc.contains("order_caps")) {
        const json& oc = doc["order_caps"];
        check_keys(oc, {"p", "q", "P", "Q"}, "order_caps");
        c.order_caps.p = get<int>(oc, "p", c.order_caps.p);
        c.order_caps.q = get<int>(oc, "q", c.order_caps.q);
        c.order_caps.P = get<int>(oc, "P", c.order_caps.P);
        c.order_caps.Q = get<int>(oc, "Q", c.order_caps.Q);
        if (std::min({c.order_caps.p, c.order_caps.q, c.order_caps.P, c.order_caps.Q}) < 0) {
            throw ConfigError("order caps must be nonnegative");
        }
    }
    c.min_weeks = get<int>(doc, "min_weeks", c.min_weeks);
    c.lag = get<int>(doc, "lag", c.lag);
    if (c.lag < 1) throw ConfigError("lag must be positive");
    c.alpha = get<double>(doc, "alpha", c.alpha);
    if (!(c.alpha > 0 && c.alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
    c.fitted_df = get<bool>(doc, "fitted_df", c.fitted_df);
    c.mlr_exogenous = get<bool>(doc, "mlr_exogenous", c.mlr_exogenous);
    c.n_perm = get<int>(doc, "n_perm", c.n_perm);
    if (c.n_perm < 99) throw ConfigError("n_perm must be at least 99");
    if (doc.contains("weights")) {
        const json& w = doc["weights"];
        check_keys(w, {"rule", "style"}, "weights");
        const auto rule = get<std::string>(w, "rule", "SharedEdge");
        if (rule == "SharedEdge") {
            c.weight_rule = ContiguityRule::SharedEdge;
        } else if (rule == "SharedPoint") {
            c.weight_rule = ContiguityRule::SharedPoint;
        } else {
            throw ConfigError("weights.rule must be SharedEdge or SharedPoint");
        }
        const auto style = get<std::string>(w, "style", "Binary");
        if (style == "Binary") {
            c.weight_style = WeightStyle::Binary;
        } else if (style == "RowStandardized") {
            c.weight_style = WeightStyle::RowStandardized;
        } else {
            throw ConfigError("weights.style must be Binary or RowStandardized");
        }
    }
    const auto alt = get<std::string>(doc, "alternative", "greater");
    if (alt == "greater") {
        c.alternative = Alternative::Greater;
    } else if (alt == "two-sided") {
        c.alternative = Alternative::TwoSided;
    } else {
        throw ConfigError("alternative must be 'greater' or 'two-sided'");
    }
    if (doc.contains("windows")) {
        c.windows.clear();
        for (const auto& w : get<std::vector<std::string>>(doc, "windows", {})) c.windows.push_back(scheme_from(w));
    }
    c.seed = get<std::uint64_t>(doc, "seed", c.seed);
    c.threads = get<int>(doc, "threads", c.threads);
    if (c.threads < 1) throw ConfigError("threads must be at least 1");
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

json to_json(const PipelineConfig& c) {
    json j;
    j["trips"] = c.trips.string();
    j["geometry"] = c.geometry.string();
    j["covariates"] = c.covariates.string();
    if (!c.exogenous.empty()) j["exogenous"] = c.exogenous.string();
    j["output_dir"] = c.output_dir.string();
    json schema = {{"zone_column", c.schema.zone_column},
                   {"date_column", c.schema.date_column},
                   {"mode_column", c.schema.mode_column},
                   {"count_column", c.schema.count_column},
                   {"delimiter", std::string(1, c.schema.delimiter)}};
    if (c.schema.fixed_mode) schema["fixed_mode"] = to_string(*c.schema.fixed_mode);
    j["schema"] = schema;
    j["zone_id_property"] = c.zone_id_property;
    j["study_window"] = range_to(c.study_window);
    j["week_anchor"] = weekday_name(c.week_anchor);
    json modes = json::array();
    for (Mode m : c.modes) modes.push_back(to_string(m));
    j["modes"] = modes;
    json gaps = json::array();
    for (const auto& g : c.gaps) {
        json ranges = json::array();
        for (const auto& r : g.ranges) ranges.push_back(range_to(r));
        gaps.push_back({{"zone_id", g.zone_id}, {"mode", to_string(g.mode)}, {"date_ranges", ranges}});
    }
    j["gaps"] = gaps;
    j["low_volume_threshold"] = c.low_volume_threshold;
    j["seasonal_period"] = c.seasonal_period;
    j["order_caps"] = {{"p", c.order_caps.p}, {"q", c.order_caps.q}, {"P", c.order_caps.P}, {"Q", c.order_caps.Q}};
    j["min_weeks"] = c.min_weeks;
    j["lag"] = c.lag;
    j["alpha"] = c.alpha;
    j["fitted_df"] = c.fitted_df;
    j["mlr_exogenous"] = c.mlr_exogenous;
    j["n_perm"] = c.n_perm;
    j["weights"] = {{"rule", to_string(c.weight_rule)}, {"style", to_string(c.weight_style)}};
    j["alternative"] = c.alternative == Alternative::Greater ? "greater" : "two-sided";
    json windows = json::array();
    for (auto w : c.windows) windows.push_back(to_string(w));
    j["windows"] = windows;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

}  // namespace stz
