#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stz/config.hpp"
#include "stz/diagnostics.hpp"
#include "stz/garch.hpp"
#include "stz/geometry.hpp"
#include "stz/ingest.hpp"
#include "stz/regression.hpp"
#include "stz/sarima.hpp"
#include "stz/spatial.hpp"

namespace stz {

struct FitSettings {
    int seasonal_period = 4;
    OrderCaps caps;
    int min_weeks = 60;
    int lag = 12;
    double alpha = 0.05;
    bool fitted_df = false;
    std::uint64_t seed = 1;
};

FitSettings fit_settings(const PipelineConfig& cfg);

/// Per-zone temporal filtering result.
struct ZoneOutcome {
    std::string zone_id;
    Mode mode = Mode::TNC;
    SarimaOrder order;
    double aic = 0.0;
    /// McLeod-Li p-value on the SARIMA residuals (decides the GARCH step).
    double arch_p = 1.0;
    bool garch_applied = false;
    GarchParams garch;
    double lb_p = 1.0;
    double ml_p = 1.0;
    /// Significance level of both residual tests.
    double alpha = 0.05;
    bool included = false;
    /// Final temporal residuals; residuals[k] belongs to panel week first_week + k.
    Eigen::VectorXd residuals;
    int first_week = 0;
    /// Non-empty when fitting failed; such zones are never included.
    std::string failure;

    bool failed() const noexcept { return !failure.empty(); }
    bool lb_fail() const noexcept { return !failed() && lb_p < alpha; }
    bool ml_fail() const noexcept { return !failed() && ml_p < alpha; }
};

/// log1p -> auto_order (d = 1, D = 0) -> McLeod-Li on the residuals ->
/// GARCH(1,1) standardization when it rejects -> Ljung-Box and McLeod-Li on
/// the final residuals. The leading conditioning innovations are not part of
/// the residuals. Throws SeriesTooShort below settings.min_weeks.
ZoneOutcome fit_zone(const Eigen::Ref<const Eigen::VectorXd>& weekly_counts, const FitSettings& settings,
                     const std::string& zone_id = {}, Mode mode = Mode::TNC);

struct TemporalWindow {
    std::string label;
    WindowScheme kind = WindowScheme::Full;
    int index = 0;  ///< segment 1..4, season 1..4 (Spring first), month 1..12
    std::vector<int> week_indices;
};

/// Leading weeks dropped so the Segment scheme splits into 4 equal blocks.
int segment_drop(int weeks) noexcept;

/// Windows of one scheme over the panel weeks. Season and Month windows
/// collect weeks by the month of their start date; months absent from the
/// panel yield no window. Throws WindowTooSmall for any window under 2 weeks.
std::vector<TemporalWindow> segment_windows(const std::vector<Date>& week_starts, WindowScheme scheme);

/// Mean residual of one zone over the window; throws EmptyWindowForZone.
double zone_window_mean(const ZoneResiduals& series, const TemporalWindow& window);

struct WindowValues {
    std::vector<std::string> zone_ids;
    Eigen::VectorXd values;
    std::vector<std::string> dropped;  ///< zones without residuals in the window
};

/// Per-zone means over the window, in input order; zones with no residual
/// in the window are dropped and listed.
WindowValues window_aggregate(std::span<const ZoneResiduals> residuals, const TemporalWindow& window);

inline constexpr const char* kStageTemporal = "arima-garch";
inline constexpr const char* kStageRegression = "arima-garch-mlr";

struct WindowAnalysis {
    std::string stage;
    TemporalWindow window;
    std::vector<std::string> dropped;
    MoranResult moran;
    LisaResult lisa;
    /// Set when the window could not be analysed (e.g. constant values).
    std::string error;
};

struct ZoneCounts {
    int total = 0;
    int fit_failures = 0;
    int lb_failures = 0;
    int ml_failures = 0;
    int both_failures = 0;
    int either_failures = 0;
    int included = 0;
};

ZoneCounts count_outcomes(std::span<const ZoneOutcome> zones);

struct ModeReport {
    Mode mode = Mode::TNC;
    WeeklyPanel panel;
    std::vector<std::string> low_volume_removed;
    std::vector<std::string> imputed_zones;
    std::vector<ZoneOutcome> zones;
    ZoneCounts counts;
    std::vector<std::string> missing_geometry;

    std::optional<RegressionFit> mains;
    std::optional<RegressionFit> interactions;
    std::string regression_error;
    std::vector<ZoneResiduals> temporal_residuals;
    std::vector<ZoneResiduals> regression_residuals;
    double temporal_variance = 0.0;
    double regression_variance = 0.0;

    int segment_drop = 0;
    std::vector<TemporalWindow> windows;
    std::map<std::string, std::string> scheme_errors;
    std::vector<WindowAnalysis> analyses;
};

struct RunReport {
    PipelineConfig config;
    std::vector<ZoneGeometry> geometries;
    SpatialWeights weights;
    std::vector<ModeReport> modes;
    std::vector<std::string> exports;
};

enum class PipelineStage { Ingest, Temporal, Regression, Spatial };

/// Runs the stages up to and including `last`. Config and I/O problems throw;
/// per-zone model failures are recorded in the report.
RunReport run_pipeline(const PipelineConfig& cfg, PipelineStage last = PipelineStage::Spatial);
RunReport run_pipeline(const std::filesystem::path& config_path, PipelineStage last = PipelineStage::Spatial);

/// Deterministic sub-seed for a named stream.
std::uint64_t stream_seed(std::uint64_t seed, const std::string& stream);

// exports

void write_zones_csv(std::ostream& out, const ModeReport& mode);
void write_residuals_csv(std::ostream& out, const ModeReport& mode);
/// scheme, window, n_zones, I, expected, variance, z, p_analytic, p_perm
void write_moran_csv(std::ostream& out, const ModeReport& mode, const std::string& stage);
void write_lisa_csv(std::ostream& out, const LisaResult& lisa);
/// FeatureCollection of the LISA zones with properties I_i, p_i, cluster.
nlohmann::json lisa_geojson(const LisaResult& lisa, std::span<const ZoneGeometry> geometries);
nlohmann::json report_json(const RunReport& report);

/// Writes every export for the stages run into cfg.output_dir and records
/// the file names (relative to it) in report.exports.
void write_exports(RunReport& report, PipelineStage last = PipelineStage::Spatial);

}  // namespace stz
