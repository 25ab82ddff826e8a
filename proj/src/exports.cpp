#include <fstream>
#include <map>

#include "stz/csv.hpp"
#include "stz/errors.hpp"
#include "stz/pipeline.hpp"

namespace stz {

using nlohmann::json;
using csv::format_number;

void write_zones_csv(std::ostream& out, const ModeReport& mode) {
    out << "zone_id,mode,order,p,d,q,P,D,Q,s,aic,arch_p,garch_applied,alpha0,alpha1,beta1,lb_p,ml_p,lb_fail,"
           "ml_fail,included,first_week,n_residuals,failure\n";
    for (const auto& z : mode.zones) {
        out << csv::escape(z.zone_id) << ',' << to_string(z.mode) << ',';
        if (z.failed()) {
            out << ",,,,,,,,,,,,,,,,,,0,0,0,,0," << csv::escape(z.failure) << '\n';
            continue;
        }
        const auto& o = z.order;
        out << csv::escape(o.label()) << ',' << o.p << ',' << o.d << ',' << o.q << ',' << o.P << ',' << o.D << ','
            << o.Q << ',' << o.s << ',' << format_number(z.aic) << ',' << format_number(z.arch_p) << ','
            << (z.garch_applied ? 1 : 0) << ',';
        if (z.garch_applied) {
            out << format_number(z.garch.alpha0) << ',' << format_number(z.garch.alpha(0)) << ','
                << format_number(z.garch.beta(0)) << ',';
        } else {
            out << ",,,";
        }
        out << format_number(z.lb_p) << ',' << format_number(z.ml_p) << ',' << z.lb_fail() << ',' << z.ml_fail()
            << ',' << z.included << ',' << z.first_week << ',' << z.residuals.size() << ",\n";
    }
}

void write_residuals_csv(std::ostream& out, const ModeReport& mode) {
    std::map<std::string, const ZoneResiduals*> mlr;
    for (const auto& z : mode.regression_residuals) mlr[z.zone_id] = &z;
    out << "zone_id,week,week_start," << kStageTemporal << ',' << kStageRegression << '\n';
    for (const auto& z : mode.temporal_residuals) {
        const auto it = mlr.find(z.zone_id);
        for (Eigen::Index k = 0; k < z.values.size(); ++k) {
            const int week = z.first_week + static_cast<int>(k);
            out << csv::escape(z.zone_id) << ',' << week << ','
                << format_date(mode.panel.week_starts[static_cast<std::size_t>(week)]) << ','
                << format_number(z.values(k)) << ',';
            if (it != mlr.end()) out << format_number(it->second->values(k));
            out << '\n';
        }
    }
}

void write_moran_csv(std::ostream& out, const ModeReport& mode, const std::string& stage) {
    out << "scheme,window,n_zones,I,expected,variance,z,p_analytic,p_perm,error\n";
    for (const auto& a : mode.analyses) {
        if (a.stage != stage) continue;
        out << to_string(a.window.kind) << ',' << a.window.label << ',';
        if (!a.error.empty()) {
            out << ",,,,,,,," << csv::escape(a.error) << '\n';
            continue;
        }
        const auto& m = a.moran;
        out << m.n << ',' << format_number(m.I) << ',' << format_number(m.expected) << ','
            << format_number(m.variance) << ',' << format_number(m.z) << ',' << format_number(m.p_analytic) << ','
            << format_number(m.p_perm) << ",\n";
    }
}

void write_lisa_csv(std::ostream& out, const LisaResult& lisa) {
    out << "zone_id,I_i,p_i,cluster,z_dev,lag\n";
    for (std::size_t i = 0; i < lisa.zone_ids.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out << csv::escape(lisa.zone_ids[i]) << ',' << format_number(lisa.I(k)) << ',' << format_number(lisa.p(k))
            << ',' << to_string(lisa.cluster[i]) << ',' << format_number(lisa.z_dev(k)) << ','
            << format_number(lisa.lag(k)) << '\n';
    }
}

namespace {

json ring_json(const Ring& r) {
    json out = json::array();
    for (const auto& p : r) out.push_back({p.x(), p.y()});
    return out;
}

json geometry_json(const ZoneGeometry& g) {
    auto polygon = [](const Polygon& p) {
        json rings = json::array();
        rings.push_back(ring_json(p.outer));
        for (const auto& h : p.holes) rings.push_back(ring_json(h));
        return rings;
    };
    if (g.parts.size() == 1) return {{"type", "Polygon"}, {"coordinates", polygon(g.parts[0])}};
    json parts = json::array();
    for (const auto& p : g.parts) parts.push_back(polygon(p));
    return {{"type", "MultiPolygon"}, {"coordinates", parts}};
}

json counts_json(const ZoneCounts& c) {
    return {{"total", c.total},
            {"fit_failures", c.fit_failures},
            {"ljung_box_failures", c.lb_failures},
            {"mcleod_li_failures", c.ml_failures},
            {"both_failures", c.both_failures},
            {"either_failures", c.either_failures},
            {"included", c.included}};
}

json fit_summary(const RegressionFit& f) {
    return {{"terms", f.terms},
            {"aic", f.aic},
            {"adj_r2", f.adj_r2},
            {"n_obs", f.n_obs},
            {"dropped", f.dropped}};
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

}  // namespace

json lisa_geojson(const LisaResult& lisa, std::span<const ZoneGeometry> geometries) {
    std::map<std::string, const ZoneGeometry*> by_id;
    for (const auto& g : geometries) by_id[g.zone_id] = &g;
    json features = json::array();
    for (std::size_t i = 0; i < lisa.zone_ids.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const auto it = by_id.find(lisa.zone_ids[i]);
        if (it == by_id.end()) throw DimensionMismatch("no geometry for zone '" + lisa.zone_ids[i] + "'");
        features.push_back({{"type", "Feature"},
                            {"properties",
                             {{"zone_id", lisa.zone_ids[i]},
                              {"I_i", lisa.I(k)},
                              {"p_i", lisa.p(k)},
                              {"cluster", to_string(lisa.cluster[i])}}},
                            {"geometry", geometry_json(*it->second)}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

json report_json(const RunReport& rep) {
    json j;
    j["config"] = to_json(rep.config);
    j["seed"] = rep.config.seed;
    j["islands"] = rep.weights.islands;
    json modes = json::array();
    for (const auto& m : rep.modes) {
        json jm;
        jm["mode"] = to_string(m.mode);
        jm["zones"] = m.panel.zone_ids;
        jm["weeks"] = m.panel.weeks();
        if (m.panel.weeks() > 0) {
            jm["first_week"] = format_date(m.panel.week_starts.front());
            jm["last_week"] = format_date(m.panel.week_starts.back());
        }
        jm["low_volume_removed"] = m.low_volume_removed;
        jm["imputed_zones"] = m.imputed_zones;
        jm["zone_counts"] = counts_json(m.counts);
        json failures = json::object();
        for (const auto& z : m.zones) {
            if (z.failed()) failures[z.zone_id] = z.failure;
        }
        jm["fit_failures"] = failures;
        jm["missing_geometry"] = m.missing_geometry;
        if (m.mains) jm["regression_mains"] = fit_summary(*m.mains);
        if (m.interactions) jm["regression_interactions"] = fit_summary(*m.interactions);
        if (!m.regression_error.empty()) jm["regression_error"] = m.regression_error;
        jm["residual_variance"] = {{kStageTemporal, m.temporal_variance}, {kStageRegression, m.regression_variance}};
        jm["segment_drop"] = m.segment_drop;
        json windows = json::array();
        for (const auto& w : m.windows) {
            windows.push_back({{"scheme", to_string(w.kind)},
                               {"label", w.label},
                               {"weeks", w.week_indices.size()},
                               {"first", w.week_indices.front()},
                               {"last", w.week_indices.back()}});
        }
        jm["windows"] = windows;
        jm["scheme_errors"] = m.scheme_errors;
        json analyses = json::array();
        for (const auto& a : m.analyses) {
            json ja{{"stage", a.stage}, {"window", a.window.label}, {"dropped", a.dropped}};
            if (!a.error.empty()) {
                ja["error"] = a.error;
            } else {
                ja["n"] = a.moran.n;
                ja["I"] = a.moran.I;
                ja["z"] = a.moran.z;
                ja["p_analytic"] = a.moran.p_analytic;
                ja["p_perm"] = a.moran.p_perm;
                std::map<std::string, std::vector<std::string>> clusters;
                for (std::size_t i = 0; i < a.lisa.zone_ids.size(); ++i) {
                    if (a.lisa.cluster[i] != Cluster::NotSignificant) {
                        clusters[to_string(a.lisa.cluster[i])].push_back(a.lisa.zone_ids[i]);
                    }
                }
                ja["clusters"] = clusters;
            }
            analyses.push_back(ja);
        }
        jm["analyses"] = analyses;
        modes.push_back(jm);
    }
    j["modes"] = modes;
    j["exports"] = rep.exports;
    return j;
}

void write_exports(RunReport& rep, PipelineStage last) {
    const auto dir = rep.config.resolve(rep.config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

    rep.exports.clear();
    auto emit = [&](const std::string& name, const std::string& body) {
        write_text(dir / name, body);
        rep.exports.push_back(name);
    };

    bool exog_written = false;
    for (const auto& m : rep.modes) {
        const std::string mode = to_string(m.mode);
        emit("panel_" + mode + ".csv", render([&](std::ostream& os) { write_panel_csv(os, m.panel); }));
        if (!exog_written && !m.panel.exog.empty()) {
            emit("exogenous_weekly.csv", render([&](std::ostream& os) {
                     os << "week_start,precipitation_in,event_count,holiday_flag\n";
                     for (std::size_t t = 0; t < m.panel.exog.size(); ++t) {
                         const auto& e = m.panel.exog[t];
                         os << format_date(m.panel.week_starts[t]) << ',' << format_number(e.precipitation_in) << ','
                            << e.event_count << ',' << e.holiday_flag << '\n';
                     }
                 }));
            exog_written = true;
        }
        if (last == PipelineStage::Ingest) continue;
        emit("zones_" + mode + ".csv", render([&](std::ostream& os) { write_zones_csv(os, m); }));
        emit("residuals_" + mode + ".csv", render([&](std::ostream& os) { write_residuals_csv(os, m); }));
        if (last == PipelineStage::Temporal) continue;
        if (m.interactions) {
            emit("regression_" + mode + ".csv",
                 render([&](std::ostream& os) { write_regression_csv(os, *m.interactions); }));
        }
        if (m.mains) {
            emit("regression_" + mode + "_mains.csv",
                 render([&](std::ostream& os) { write_regression_csv(os, *m.mains); }));
        }
        if (last == PipelineStage::Regression) continue;
        for (const char* stage : {kStageTemporal, kStageRegression}) {
            if (stage == kStageRegression && !m.interactions) continue;
            emit("moran_" + mode + "_" + stage + ".csv",
                 render([&](std::ostream& os) { write_moran_csv(os, m, stage); }));
        }
        for (const auto& a : m.analyses) {
            if (!a.error.empty()) continue;
            const std::string stem = "lisa_" + mode + "_" + a.stage + "_" + a.window.label;
            emit(stem + ".geojson", lisa_geojson(a.lisa, rep.geometries).dump(1) + "\n");
            emit(stem + ".csv", render([&](std::ostream& os) { write_lisa_csv(os, a.lisa); }));
        }
    }
    rep.exports.push_back("report.json");
    write_text(dir / "report.json", report_json(rep).dump(2) + "\n");
}

}  // namespace stz
