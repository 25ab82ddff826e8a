#include "stz/errors.hpp"

#include <utility>

namespace stz {

MalformedRow::MalformedRow(std::size_t row, std::string reason)
    : Error("malformed row " + std::to_string(row) + ": " + reason), row_(row), reason_(std::move(reason)) {}

UnimputableWeekday::UnimputableWeekday(std::string weekday)
    : Error("no observed values on " + weekday + " to impute from"), weekday_(std::move(weekday)) {}

MissingCovariates::MissingCovariates(std::string zone_id)
    : Error("no covariate row for zone '" + zone_id + "'"), zone_id_(std::move(zone_id)) {}

InvalidGeometry::InvalidGeometry(std::string zone_id, const std::string& reason)
    : Error("invalid geometry for zone '" + zone_id + "': " + reason), zone_id_(std::move(zone_id)) {}

EmptyWindowForZone::EmptyWindowForZone(std::string zone_id, const std::string& window)
    : Error("zone '" + zone_id + "' has no residuals in window " + window), zone_id_(std::move(zone_id)) {}

}  // namespace stz
