#include "stz/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "stz/errors.hpp"

namespace stz {

FitSettings fit_settings(const PipelineConfig& cfg) {
    FitSettings s;
    s.seasonal_period = cfg.seasonal_period;
    s.caps = cfg.order_caps;
    s.min_weeks = cfg.min_weeks;
    s.lag = cfg.lag;
    s.alpha = cfg.alpha;
    s.fitted_df = cfg.fitted_df;
    s.seed = cfg.seed;
    return s;
}

std::uint64_t stream_seed(std::uint64_t seed, const std::string& stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix_seed(seed, h);
}

ZoneOutcome fit_zone(const Eigen::Ref<const Eigen::VectorXd>& weekly_counts, const FitSettings& settings,
                     const std::string& zone_id, Mode mode) {
    if (weekly_counts.size() < settings.min_weeks) {
        throw SeriesTooShort("zone '" + zone_id + "' has " + std::to_string(weekly_counts.size()) +
                             " weeks; at least " + std::to_string(settings.min_weeks) + " are required");
    }
    ZoneOutcome out;
    out.zone_id = zone_id;
    out.mode = mode;
    out.alpha = settings.alpha;

    const Eigen::VectorXd y = log_transform(weekly_counts);
    SarimaOptions sopts;
    sopts.seed = mix_seed(settings.seed, 1);
    const SarimaFit fit = auto_order(y, settings.seasonal_period, 1, 0, settings.caps, sopts);
    out.order = fit.order;
    out.aic = fit.aic;

    const int cond = fit.conditioning;
    const Eigen::Index n = fit.residuals.size() - cond;
    if (n <= settings.lag + 1) throw SeriesTooShort("too few residuals after conditioning for lag " +
                                                    std::to_string(settings.lag));
    Eigen::VectorXd r = fit.residuals.tail(n);
    out.first_week = fit.order.d + fit.order.s * fit.order.D + cond;

    out.arch_p = mcleod_li(r, settings.lag).p_value;
    if (out.arch_p < settings.alpha) {
        GarchOptions gopts;
        gopts.seed = mix_seed(settings.seed, 2);
        const GarchFit g = fit_garch(r, GarchOrder{1, 1}, gopts);
        out.garch_applied = true;
        out.garch = g.params;
        r = g.std_resid;
    }
    const int fitted = settings.fitted_df ? fit.order.arma_terms() : 0;
    out.lb_p = ljung_box(r, settings.lag, fitted).p_value;
    out.ml_p = mcleod_li(r, settings.lag).p_value;
    out.included = out.lb_p >= settings.alpha && out.ml_p >= settings.alpha;
    out.residuals = std::move(r);
    return out;
}

int segment_drop(int weeks) noexcept { return weeks > 0 ? weeks % 4 : 0; }

namespace {

constexpr std::array<const char*, 12> kMonthLabels = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr std::array<const char*, 4> kSeasonLabels = {"Spring", "Summer", "Autumn", "Winter"};

int season_of(unsigned month) {
    if (month >= 3 && month <= 5) return 1;
    if (month >= 6 && month <= 8) return 2;
    if (month >= 9 && month <= 11) return 3;
    return 4;
}

}  // namespace

std::vector<TemporalWindow> segment_windows(const std::vector<Date>& week_starts, WindowScheme scheme) {
    const int t = static_cast<int>(week_starts.size());
    std::vector<TemporalWindow> out;
    switch (scheme) {
        case WindowScheme::Full: {
            TemporalWindow w{"Full", scheme, 0, {}};
            for (int i = 0; i < t; ++i) w.week_indices.push_back(i);
            out.push_back(std::move(w));
            break;
        }
        case WindowScheme::Segment: {
            const int drop = segment_drop(t);
            const int len = (t - drop) / 4;
            for (int k = 0; k < 4; ++k) {
                TemporalWindow w{"Segment" + std::to_string(k + 1), scheme, k + 1, {}};
                for (int i = 0; i < len; ++i) w.week_indices.push_back(drop + k * len + i);
                out.push_back(std::move(w));
            }
            break;
        }
        case WindowScheme::Season:
        case WindowScheme::Month: {
            const bool season = scheme == WindowScheme::Season;
            std::vector<TemporalWindow> slots(season ? 4 : 12);
            for (std::size_t k = 0; k < slots.size(); ++k) {
                slots[k].kind = scheme;
                slots[k].index = static_cast<int>(k) + 1;
                slots[k].label = season ? kSeasonLabels[k] : kMonthLabels[k];
            }
            for (int i = 0; i < t; ++i) {
                const unsigned m = month_of(week_starts[static_cast<std::size_t>(i)]);
                const int slot = season ? season_of(m) : static_cast<int>(m);
                slots[static_cast<std::size_t>(slot - 1)].week_indices.push_back(i);
            }
            for (auto& w : slots) {
                if (!w.week_indices.empty()) out.push_back(std::move(w));
            }
            break;
        }
    }
    for (const auto& w : out) {
        if (w.week_indices.size() < 2) {
            throw WindowTooSmall("window '" + w.label + "' spans " + std::to_string(w.week_indices.size()) +
                                 " week(s); at least 2 are required");
        }
    }
    return out;
}

double zone_window_mean(const ZoneResiduals& series, const TemporalWindow& window) {
    double sum = 0.0;
    int n = 0;
    for (int week : window.week_indices) {
        const int k = week - series.first_week;
        if (k >= 0 && k < series.values.size()) {
            sum += series.values(k);
            ++n;
        }
    }
    if (n == 0) throw EmptyWindowForZone(series.zone_id, window.label);
    return sum / n;
}

WindowValues window_aggregate(std::span<const ZoneResiduals> residuals, const TemporalWindow& window) {
    WindowValues out;
    std::vector<double> vals;
    for (const auto& z : residuals) {
        try {
            vals.push_back(zone_window_mean(z, window));
            out.zone_ids.push_back(z.zone_id);
        } catch (const EmptyWindowForZone&) {
            out.dropped.push_back(z.zone_id);
        }
    }
    out.values = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    return out;
}

ZoneCounts count_outcomes(std::span<const ZoneOutcome> zones) {
    ZoneCounts c;
    for (const auto& z : zones) {
        ++c.total;
        if (z.failed()) {
            ++c.fit_failures;
            continue;
        }
        c.lb_failures += z.lb_fail();
        c.ml_failures += z.ml_fail();
        c.both_failures += z.lb_fail() && z.ml_fail();
        c.either_failures += z.lb_fail() || z.ml_fail();
        c.included += z.included;
    }
    return c;
}

namespace {

std::ifstream open_input(const std::filesystem::path& p, const std::string& what) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot read " + what + " file '" + p.string() + "'");
    return in;
}

std::vector<ZoneOutcome> fit_all(const WeeklyPanel& panel, const PipelineConfig& cfg) {
    const auto n = static_cast<std::size_t>(panel.zones());
    std::vector<ZoneOutcome> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mu;

    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const std::string& id = panel.zone_ids[i];
            FitSettings s = fit_settings(cfg);
            s.seed = stream_seed(cfg.seed, "fit|" + to_string(panel.mode) + "|" + id);
            try {
                out[i] = fit_zone(panel.counts.row(static_cast<Eigen::Index>(i)).transpose(), s, id, panel.mode);
            } catch (const Error& e) {
                out[i] = ZoneOutcome{};
                out[i].zone_id = id;
                out[i].mode = panel.mode;
                out[i].alpha = cfg.alpha;
                out[i].failure = e.what();
            } catch (...) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };
    const int threads = std::min<int>(cfg.threads, static_cast<int>(std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);
    return out;
}

double pooled_variance(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

void run_regression(ModeReport& mr, const std::vector<ZoneCovariates>& covariates, const PipelineConfig& cfg) {
    if (mr.temporal_residuals.empty()) {
        mr.regression_error = "no included zones";
        return;
    }
    const std::vector<WeeklyExog>* exog = cfg.mlr_exogenous ? &mr.panel.exog : nullptr;
    if (exog != nullptr && exog->size() != static_cast<std::size_t>(mr.panel.weeks())) {
        throw ConfigError("mlr_exogenous is set but no exogenous file was read");
    }
    try {
        const DesignMatrix mains = build_design(mr.temporal_residuals, covariates, false, exog);
        mr.mains = stepwise_aic(mains);
        const DesignMatrix full = build_design(mr.temporal_residuals, covariates, true, exog);
        mr.interactions = stepwise_aic(full);
        mr.temporal_variance = pooled_variance(full.y);
        mr.regression_variance = pooled_variance(mr.interactions->residuals);

        Eigen::Index offset = 0;
        for (const auto& z : mr.temporal_residuals) {
            ZoneResiduals e{z.zone_id, z.first_week, mr.interactions->residuals.segment(offset, z.values.size())};
            offset += z.values.size();
            mr.regression_residuals.push_back(std::move(e));
        }
    } catch (const MissingCovariates&) {
        throw;
    } catch (const Underdetermined& e) {
        mr.regression_error = e.what();
        mr.mains.reset();
        mr.interactions.reset();
        mr.regression_residuals.clear();
    }
}

void run_spatial(ModeReport& mr, const SpatialWeights& all_weights, const PipelineConfig& cfg) {
    std::set<std::string> with_geometry(all_weights.zone_ids.begin(), all_weights.zone_ids.end());
    auto spatial_only = [&](const std::vector<ZoneResiduals>& in) {
        std::vector<ZoneResiduals> out;
        for (const auto& z : in) {
            if (with_geometry.count(z.zone_id)) out.push_back(z);
        }
        return out;
    };
    for (const auto& z : mr.temporal_residuals) {
        if (!with_geometry.count(z.zone_id)) mr.missing_geometry.push_back(z.zone_id);
    }
    const std::vector<ZoneResiduals> temporal = spatial_only(mr.temporal_residuals);
    const std::vector<ZoneResiduals> regression = spatial_only(mr.regression_residuals);

    mr.segment_drop = segment_drop(static_cast<int>(mr.panel.weeks()));
    for (WindowScheme scheme : cfg.windows) {
        std::vector<TemporalWindow> windows;
        try {
            windows = segment_windows(mr.panel.week_starts, scheme);
        } catch (const WindowTooSmall& e) {
            mr.scheme_errors[to_string(scheme)] = e.what();
            continue;
        }
        mr.windows.insert(mr.windows.end(), windows.begin(), windows.end());
        for (const char* stage : {kStageTemporal, kStageRegression}) {
            const auto& series = stage == kStageTemporal ? temporal : regression;
            if (stage == kStageRegression && !mr.interactions) continue;
            for (const auto& window : windows) {
                WindowAnalysis a;
                a.stage = stage;
                a.window = window;
                const WindowValues vals = window_aggregate(series, window);
                a.dropped = vals.dropped;
                const std::string tag = to_string(mr.mode) + "|" + stage + "|" + window.label;
                try {
                    const SpatialWeights w = all_weights.subset(vals.zone_ids);
                    MoranOptions opts;
                    opts.alternative = cfg.alternative;
                    a.moran = moran_test(vals.values, w, cfg.n_perm, stream_seed(cfg.seed, "moran|" + tag), opts);
                    a.moran.window_label = window.label;
                    a.lisa = local_moran(vals.values, w, cfg.n_perm, stream_seed(cfg.seed, "lisa|" + tag), cfg.alpha);
                } catch (const Error& e) {
                    a.error = e.what();
                }
                mr.analyses.push_back(std::move(a));
            }
        }
    }
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& cfg, PipelineStage last) {
    RunReport rep;
    rep.config = cfg;

    const auto trips_path = cfg.resolve(cfg.trips);
    const auto geometry_path = cfg.resolve(cfg.geometry);
    const auto covariates_path = cfg.resolve(cfg.covariates);
    const auto exog_path = cfg.resolve(cfg.exogenous);
    // Fail fast on unreadable inputs before any model work.
    auto trips_in = open_input(trips_path, "trips");
    auto geometry_in = open_input(geometry_path, "geometry");
    auto covariates_in = open_input(covariates_path, "covariates");

    const std::vector<TripRecord> records = parse_trips(trips_in, cfg.schema);
    std::vector<ExogDay> exog;
    if (!cfg.exogenous.empty()) {
        auto in = open_input(exog_path, "exogenous");
        exog = parse_exogenous(in);
    }
    rep.geometries = parse_geojson(geometry_in, cfg.zone_id_property);
    const std::vector<ZoneCovariates> covariates = parse_covariates(covariates_in);
    if (last == PipelineStage::Spatial) {
        rep.weights = build_contiguity(rep.geometries, cfg.weight_rule, cfg.weight_style);
    }

    for (Mode mode : cfg.modes) {
        ModeReport mr;
        mr.mode = mode;
        DailyMap daily = build_daily(records, cfg.study_window, mode, cfg.gaps);
        for (auto& [zone, series] : daily) {
            if (series.has_missing()) {
                series = impute_local_average(series);
                mr.imputed_zones.push_back(zone);
            }
        }
        LowVolumeFilter filtered = filter_low_volume(daily, cfg.low_volume_threshold);
        mr.low_volume_removed = filtered.removed;
        mr.panel = aggregate_weekly(filtered.kept, mode, cfg.week_anchor, exog);

        if (last != PipelineStage::Ingest) {
            mr.zones = fit_all(mr.panel, cfg);
            mr.counts = count_outcomes(mr.zones);
            for (const auto& z : mr.zones) {
                if (z.included) mr.temporal_residuals.push_back({z.zone_id, z.first_week, z.residuals});
            }
        }
        if (last == PipelineStage::Regression || last == PipelineStage::Spatial) run_regression(mr, covariates, cfg);
        if (last == PipelineStage::Spatial) run_spatial(mr, rep.weights, cfg);
        rep.modes.push_back(std::move(mr));
    }
    return rep;
}

RunReport run_pipeline(const std::filesystem::path& config_path, PipelineStage last) {
    return run_pipeline(load_config(config_path), last);
}

}  // namespace stz
