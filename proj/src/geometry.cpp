#include "stz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include <json.hpp>

#include "stz/errors.hpp"

namespace stz {

namespace {

using json = nlohmann::json;

struct Box {
    double x0, y0, x1, y1;

    bool overlaps(const Box& o, double tol) const {
        return x0 <= o.x1 + tol && o.x0 <= x1 + tol && y0 <= o.y1 + tol && o.y0 <= y1 + tol;
    }
};

Box box_of(const Point& a, const Point& b) {
    return {std::min(a.x(), b.x()), std::min(a.y(), b.y()), std::max(a.x(), b.x()), std::max(a.y(), b.y())};
}

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

int orient(const Point& o, const Point& a, const Point& b) {
    const double c = cross(o, a, b);
    return (c > 0) - (c < 0);
}

bool on_segment(const Point& p, const Point& a, const Point& b) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
           p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(c, a, b)) return true;
    if (o2 == 0 && on_segment(d, a, b)) return true;
    if (o3 == 0 && on_segment(a, c, d)) return true;
    if (o4 == 0 && on_segment(b, c, d)) return true;
    return false;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double segment_distance(const Point& a, const Point& b, const Point& c, const Point& d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d), point_segment_distance(c, a, b),
                     point_segment_distance(d, a, b)});
}

// Length of the collinear overlap of cd along ab, or 0 when not collinear.
double collinear_overlap(const Point& a, const Point& b, const Point& c, const Point& d, double tol) {
    const Point ab = b - a;
    const double len = ab.norm();
    if (len == 0.0) return 0.0;
    const Point u = ab / len;
    auto line_dist = [&](const Point& p) { return std::abs(u.x() * (p.y() - a.y()) - u.y() * (p.x() - a.x())); };
    if (line_dist(c) > tol || line_dist(d) > tol) return 0.0;
    const double tc = (c - a).dot(u);
    const double td = (d - a).dot(u);
    const double lo = std::max(0.0, std::min(tc, td));
    const double hi = std::min(len, std::max(tc, td));
    return std::max(0.0, hi - lo);
}

std::vector<const Ring*> rings_of(const ZoneGeometry& g) {
    std::vector<const Ring*> out;
    for (const auto& p : g.parts) {
        out.push_back(&p.outer);
        for (const auto& h : p.holes) out.push_back(&h);
    }
    return out;
}

Box zone_box(const ZoneGeometry& g) {
    Box b{INFINITY, INFINITY, -INFINITY, -INFINITY};
    for (const Ring* r : rings_of(g)) {
        for (const auto& p : *r) {
            b.x0 = std::min(b.x0, p.x());
            b.y0 = std::min(b.y0, p.y());
            b.x1 = std::max(b.x1, p.x());
            b.y1 = std::max(b.y1, p.y());
        }
    }
    return b;
}

Ring parse_ring(const json& j, const std::string& zone) {
    if (!j.is_array()) throw InvalidGeometry(zone, "ring is not an array");
    Ring ring;
    for (const auto& pos : j) {
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
            throw InvalidGeometry(zone, "position must be [x, y]");
        }
        ring.emplace_back(pos[0].get<double>(), pos[1].get<double>());
    }
    return ring;
}

Polygon parse_polygon(const json& j, const std::string& zone) {
    if (!j.is_array() || j.empty()) throw InvalidGeometry(zone, "polygon has no rings");
    Polygon poly;
    poly.outer = parse_ring(j[0], zone);
    for (std::size_t i = 1; i < j.size(); ++i) poly.holes.push_back(parse_ring(j[i], zone));
    return poly;
}

Ring clean_ring(const Ring& ring, const std::string& zone, double tol) {
    if (ring.size() < 4) throw InvalidGeometry(zone, "ring needs at least four positions");
    if ((ring.front() - ring.back()).norm() > tol) throw InvalidGeometry(zone, "ring is not closed");
    Ring out;
    for (const auto& p : ring) {
        if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
    }
    if ((out.front() - out.back()).norm() > tol) out.push_back(out.front());
    out.back() = out.front();
    if (out.size() < 4) throw InvalidGeometry(zone, "ring has fewer than three distinct vertices");

    const std::size_t m = out.size() - 1;  // segment count
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if (adjacent) continue;
            if (segments_intersect(out[i], out[i + 1], out[j], out[j + 1])) {
                throw InvalidGeometry(zone, "ring self-intersects");
            }
        }
    }
    return out;
}

}  // namespace

std::vector<ZoneGeometry> parse_geojson(std::istream& in, const std::string& id_property) {
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError(std::string("GeoJSON parse error: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
        throw IoError("GeoJSON root must be a FeatureCollection");
    }
    std::vector<ZoneGeometry> out;
    std::size_t index = 0;
    for (const auto& f : doc["features"]) {
        const std::string fallback = "#" + std::to_string(index++);
        if (!f.contains("properties") || !f["properties"].is_object() || !f["properties"].contains(id_property)) {
            throw InvalidGeometry(fallback, "feature lacks property '" + id_property + "'");
        }
        const auto& idv = f["properties"][id_property];
        ZoneGeometry g;
        if (idv.is_string()) {
            g.zone_id = idv.get<std::string>();
        } else if (idv.is_number_integer()) {
            g.zone_id = std::to_string(idv.get<long long>());
        } else if (idv.is_number()) {
            g.zone_id = idv.dump();
        } else {
            throw InvalidGeometry(fallback, "zone id must be a string or number");
        }
        if (!f.contains("geometry") || !f["geometry"].is_object()) throw InvalidGeometry(g.zone_id, "missing geometry");
        const auto& geom = f["geometry"];
        const std::string type = geom.value("type", "");
        if (!geom.contains("coordinates")) throw InvalidGeometry(g.zone_id, "missing coordinates");
        if (type == "Polygon") {
            g.parts.push_back(parse_polygon(geom["coordinates"], g.zone_id));
        } else if (type == "MultiPolygon") {
            for (const auto& p : geom["coordinates"]) g.parts.push_back(parse_polygon(p, g.zone_id));
        } else {
            throw InvalidGeometry(g.zone_id, "unsupported geometry type '" + type + "'");
        }
        out.push_back(std::move(g));
    }
    return out;
}

ZoneGeometry clean_geometry(const ZoneGeometry& g, double tol) {
    if (g.parts.empty()) throw InvalidGeometry(g.zone_id, "no polygons");
    ZoneGeometry out{g.zone_id, {}};
    for (const auto& p : g.parts) {
        Polygon c;
        c.outer = clean_ring(p.outer, g.zone_id, tol);
        for (const auto& h : p.holes) c.holes.push_back(clean_ring(h, g.zone_id, tol));
        out.parts.push_back(std::move(c));
    }
    return out;
}

std::vector<ZoneGeometry> grid_geometries(int rows, int cols, const std::vector<std::string>& ids) {
    if (!ids.empty() && ids.size() != static_cast<std::size_t>(rows * cols)) {
        throw DimensionMismatch("grid id count must equal rows * cols");
    }
    std::vector<ZoneGeometry> out;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            ZoneGeometry g;
            g.zone_id = ids.empty() ? "r" + std::to_string(r) + "c" + std::to_string(c)
                                    : ids[static_cast<std::size_t>(r * cols + c)];
            const double x = c, y = -r;
            Polygon p;
            p.outer = {Point(x, y), Point(x + 1, y), Point(x + 1, y - 1), Point(x, y - 1), Point(x, y)};
            g.parts.push_back(std::move(p));
            out.push_back(std::move(g));
        }
    }
    return out;
}

Contact boundary_contact(const ZoneGeometry& a, const ZoneGeometry& b, double tol) {
    if (!zone_box(a).overlaps(zone_box(b), tol)) return Contact::None;
    Contact best = Contact::None;
    for (const Ring* ra : rings_of(a)) {
        for (const Ring* rb : rings_of(b)) {
            for (std::size_t i = 0; i + 1 < ra->size(); ++i) {
                const Point& p0 = (*ra)[i];
                const Point& p1 = (*ra)[i + 1];
                const Box bi = box_of(p0, p1);
                for (std::size_t j = 0; j + 1 < rb->size(); ++j) {
                    const Point& q0 = (*rb)[j];
                    const Point& q1 = (*rb)[j + 1];
                    if (!bi.overlaps(box_of(q0, q1), tol)) continue;
                    if (collinear_overlap(p0, p1, q0, q1, tol) > tol) return Contact::Edge;
                    if (best == Contact::None && segment_distance(p0, p1, q0, q1) <= tol) best = Contact::Point;
                }
            }
        }
    }
    return best;
}

}  // namespace stz
