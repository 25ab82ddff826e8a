#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stz/ingest.hpp"
#include "stz/sarima.hpp"
#include "stz/spatial.hpp"

namespace stz {

enum class WindowScheme { Full, Segment, Season, Month };

std::string to_string(WindowScheme s);

struct PipelineConfig {
    /// Directory relative paths are resolved against (the config file's folder).
    std::filesystem::path base_dir;

    std::filesystem::path trips;
    std::filesystem::path geometry;
    std::filesystem::path covariates;
    std::filesystem::path exogenous;  ///< optional
    std::filesystem::path output_dir = "output";

    TripSchema schema;
    std::string zone_id_property = "zone_id";
    DateRange study_window{};
    std::chrono::weekday week_anchor = std::chrono::Sunday;
    std::vector<Mode> modes = {Mode::TNC, Mode::Taxi};
    std::vector<GapDeclaration> gaps;
    double low_volume_threshold = 10.0;

    int seasonal_period = 4;
    OrderCaps order_caps;
    int min_weeks = 60;
    int lag = 12;
    double alpha = 0.05;
    /// Subtract fitted ARMA terms from the Ljung-Box degrees of freedom.
    bool fitted_df = false;

    bool mlr_exogenous = false;

    int n_perm = 999;
    ContiguityRule weight_rule = ContiguityRule::SharedEdge;
    WeightStyle weight_style = WeightStyle::Binary;
    Alternative alternative = Alternative::Greater;
    std::vector<WindowScheme> windows = {WindowScheme::Full, WindowScheme::Segment, WindowScheme::Season,
                                         WindowScheme::Month};

    std::uint64_t seed = 1;
    int threads = 1;

    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses a config document. Relative paths are kept as written and later
/// resolved against base_dir. Throws ConfigError on unknown keys or bad values.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; base_dir becomes the file's directory.
/// Throws IoError naming the path when it cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);

/// Round-trippable JSON form, used for the report snapshot.
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace stz
