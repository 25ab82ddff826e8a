#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace stz {

using Point = Eigen::Vector2d;
/// Closed ring: first and last vertices coincide.
using Ring = std::vector<Point>;

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
};

/// A zone's footprint (Polygon or MultiPolygon).
struct ZoneGeometry {
    std::string zone_id;
    std::vector<Polygon> parts;
};

/// Reads a GeoJSON FeatureCollection of Polygon/MultiPolygon features keyed by
/// the given property. Numeric property values are converted to text.
/// Throws InvalidGeometry for malformed features.
std::vector<ZoneGeometry> parse_geojson(std::istream& in, const std::string& id_property = "zone_id");

/// Removes repeated consecutive vertices and checks each ring is closed, has
/// at least three distinct vertices and does not self-intersect.
ZoneGeometry clean_geometry(const ZoneGeometry& g, double tol = 1e-9);

/// Axis-aligned unit squares on a rows x cols grid; zone ids are
/// "r<row>c<col>" unless ids are supplied (row-major).
std::vector<ZoneGeometry> grid_geometries(int rows, int cols, const std::vector<std::string>& ids = {});

enum class Contact { None, Point, Edge };

/// Strongest boundary contact between two zones under the tolerance.
Contact boundary_contact(const ZoneGeometry& a, const ZoneGeometry& b, double tol = 1e-9);

}  // namespace stz
