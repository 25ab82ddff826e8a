#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stz/calendar.hpp"

namespace stz {

/// Seeded synthetic city on a rows x cols lattice of square zones.
///
/// Every zone follows a log-level random walk whose increments are ARMA(1)
/// filtered GARCH-type shocks. Zones in the high block carry an ARCH-in-mean
/// effect: shocks lean positive in calm weeks and negative in volatile
/// weeks, so their volatility-standardized residuals average above zero.
/// The low block mirrors this with the opposite sign. Level shifts alone
/// would not survive differencing and drift estimation, which is why the
/// planted structure lives in the mean/volatility interplay.
struct SynthOptions {
    std::uint64_t seed = 20150111;
    int rows = 2;
    int cols = 10;
    int weeks = 521;
    /// First day of trip data; may precede the first Sunday.
    Date first_day = Date{std::chrono::year{2015} / 1 / 8};
    /// Conditional-mean magnitude (in shock standard deviations) of the blocks.
    double in_mean = 0.5;
    double arch_alpha = 0.5;
    std::vector<int> high_block = {0, 1, 10, 11};
    std::vector<int> low_block = {8, 9, 18, 19};
};

struct SynthManifest {
    std::vector<std::string> zone_ids;
    std::vector<std::string> high_block;
    std::vector<std::string> low_block;
    std::string low_volume_zone;
    std::string gap_zone;
    std::vector<std::string> files;
};

/// Writes trips.csv, zones.geojson, covariates.csv, exogenous.csv,
/// planted.json and config.json into dir.
SynthManifest write_synthetic_dataset(const std::filesystem::path& dir, const SynthOptions& opts = {});

}  // namespace stz
