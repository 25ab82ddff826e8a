#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "stz/errors.hpp"
#include "stz/geometry.hpp"
#include "stz/spatial.hpp"

using namespace stz;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

SpatialWeights ring4() {
    return weights_from_neighbors({"a", "b", "c", "d"}, {{1, 3}, {0, 2}, {1, 3}, {0, 2}});
}

std::size_t degree(const SpatialWeights& w, const std::string& id) {
    for (std::size_t i = 0; i < w.zone_ids.size(); ++i) {
        if (w.zone_ids[i] == id) return w.neighbors[i].size();
    }
    return 999;
}

SpatialWeights random_weights(int n, std::mt19937_64& rng) {
    std::bernoulli_distribution edge(0.35);
    std::vector<std::vector<int>> nb(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (edge(rng)) {
                nb[static_cast<std::size_t>(i)].push_back(j);
                nb[static_cast<std::size_t>(j)].push_back(i);
            }
        }
    }
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("z" + std::to_string(i));
    return weights_from_neighbors(ids, nb);
}

}  // namespace

TEST_CASE("contiguity on a 2x2 grid") {
    const auto grid = grid_geometries(2, 2);
    const auto rook = build_contiguity(grid, ContiguityRule::SharedEdge);
    const auto queen = build_contiguity(grid, ContiguityRule::SharedPoint);
    for (const auto& id : rook.zone_ids) {
        CHECK(degree(rook, id) == 2);
        CHECK(degree(queen, id) == 3);
    }
    CHECK(rook.s0 == 8.0);
    CHECK(queen.s0 == 12.0);
    CHECK(rook.islands.empty());

    const auto single = build_contiguity(std::span(grid).first(1));
    CHECK(single.islands == std::vector<std::string>{grid[0].zone_id});
    CHECK(single.neighbors[0].empty());
}

TEST_CASE("contiguity agrees with lattice weights") {
    for (auto rule : {ContiguityRule::SharedEdge, ContiguityRule::SharedPoint}) {
        const auto geo = build_contiguity(grid_geometries(4, 5), rule);
        const auto lat = lattice_weights(4, 5, rule);
        CHECK(geo.neighbors == lat.neighbors);
        CHECK(geo.s0 == lat.s0);
    }
}

TEST_CASE("contiguity from GeoJSON with a MultiPolygon and tolerance") {
    std::istringstream in(R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"zone_id":1},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
      {"type":"Feature","properties":{"zone_id":2},"geometry":{"type":"Polygon","coordinates":[[[1.0000000001,0.2],[2,0.2],[2,0.8],[1.0000000001,0.8],[1.0000000001,0.2]]]}},
      {"type":"Feature","properties":{"zone_id":3},"geometry":{"type":"MultiPolygon","coordinates":[
         [[[5,5],[6,5],[6,6],[5,6],[5,5]]],
         [[[1,1],[1.5,1],[1.5,2],[1,2],[1,1]]]]}}]})");
    const auto geoms = parse_geojson(in);
    REQUIRE(geoms.size() == 3);
    CHECK(geoms[0].zone_id == "1");
    const auto rook = build_contiguity(geoms, ContiguityRule::SharedEdge);
    CHECK(rook.neighbors[0] == std::vector<int>{1});
    CHECK(rook.neighbors[2].empty());
    const auto queen = build_contiguity(geoms, ContiguityRule::SharedPoint);
    CHECK(queen.neighbors[0] == std::vector<int>{1, 2});
    CHECK(queen.islands.empty());
}

TEST_CASE("invalid geometries are rejected") {
    ZoneGeometry bow;
    bow.zone_id = "bow";
    bow.parts.push_back({{{0, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}}, {}});
    try {
        clean_geometry(bow);
        FAIL("expected InvalidGeometry");
    } catch (const InvalidGeometry& e) {
        CHECK(e.zone_id() == "bow");
    }
    ZoneGeometry open;
    open.zone_id = "open";
    open.parts.push_back({{{0, 0}, {1, 0}, {1, 1}}, {}});
    CHECK_THROWS_AS(clean_geometry(open), InvalidGeometry);

    auto dup = grid_geometries(1, 2, {"x", "x"});
    CHECK_THROWS_AS(build_contiguity(dup), InvalidGeometry);
}

TEST_CASE("weights validation and structure") {
    CHECK_THROWS(weights_from_neighbors({"a", "b"}, {{1}, {}}));
    CHECK_THROWS(weights_from_neighbors({"a", "b"}, {{0}, {}}));
    CHECK_THROWS(weights_from_neighbors({"a", "b"}, {{2}, {}}));
    const auto w = lattice_weights(3, 4, ContiguityRule::SharedPoint, WeightStyle::RowStandardized);
    const auto W = w.dense();
    CHECK(std::abs(W.sum() - w.s0) < 1e-12);
    CHECK(w.s0 == doctest::Approx(12.0));
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        CHECK(W(i, i) == 0.0);
        CHECK(W.row(i).sum() == doctest::Approx(1.0));
        for (Eigen::Index j = 0; j < W.cols(); ++j) CHECK((W(i, j) > 0) == (W(j, i) > 0));
    }
    const auto b = lattice_weights(3, 4);
    const auto B = b.dense();
    CHECK(((B.array() == 0) || (B.array() == 1)).all());
    CHECK((B - B.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(12, 1, 12);
    CHECK((b.lag(v) - B * v).cwiseAbs().maxCoeff() < 1e-12);

    const auto sub = b.subset({"r0c1", "r0c0", "r2c3"});
    CHECK(sub.neighbors[0] == std::vector<int>{1});
    CHECK(sub.islands == std::vector<std::string>{"r2c3"});
    CHECK(sub.s0 == 2.0);
}

TEST_CASE("global Moran examples") {
    const auto r = global_moran(vec({1, -1, 1, -1}), ring4());
    CHECK(r.I == -1.0);
    CHECK(r.expected == doctest::Approx(-1.0 / 3.0));
    CHECK(r.z == doctest::Approx((r.I - r.expected) / std::sqrt(r.variance)));
    CHECK_THROWS_AS(global_moran(vec({2, 2, 2, 2}), ring4()), ConstantValues);
    CHECK_THROWS_AS(global_moran(vec({1, 2, 3}), ring4()), DimensionMismatch);
    // n = 3 falls back to the normality variance; on a path it is 3/8 - 1/4.
    const auto path = weights_from_neighbors({"a", "b", "c"}, {{1}, {0, 2}, {1}});
    const auto small = global_moran(vec({1, 2, 4}), path);
    CHECK(small.variance == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("Moran variance under normality matches the closed form") {
    const auto w = lattice_weights(4, 4);
    const auto W = w.dense();
    const double n = 16;
    const double s0 = W.sum();
    const double s1 = 0.5 * (W + W.transpose()).array().square().sum();
    const double s2 = (W.rowwise().sum() + W.colwise().sum().transpose()).array().square().sum();
    const double expected_var = (n * n * s1 - n * s2 + 3 * s0 * s0) / ((n * n - 1) * s0 * s0) - 1.0 / ((n - 1) * (n - 1));
    const auto r = global_moran(Eigen::VectorXd::LinSpaced(16, 0, 3), w, {.variance = VarianceAssumption::Normality});
    CHECK(r.variance == doctest::Approx(expected_var).epsilon(1e-12));
}

TEST_CASE("Moran oracle equivalence on random instances") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 3 + rep % 10;
        const auto w = random_weights(n, rng);
        if (w.s0 == 0) continue;
        Eigen::VectorXd x(n);
        for (auto& v : x) v = g(rng);
        const auto W = w.dense();
        CHECK(std::abs(moran_statistic(x, w) - oracle::moran(x, W)) < 1e-12);
        const auto lisa = local_moran(x, w, 99, 1);
        CHECK((lisa.I - oracle::local_moran(x, W)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("affine and relabeling invariance") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const auto w = lattice_weights(5, 5, ContiguityRule::SharedPoint);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd x(25);
        for (auto& v : x) v = g(rng);
        const auto base = global_moran(x, w);
        for (auto [a, b] : {std::pair{3.0, 2.0}, {-10.0, 0.01}, {100.0, 50.0}}) {
            const auto t = global_moran((a + b * x.array()).matrix(), w);
            CHECK(std::abs(t.I - base.I) < 1e-10);
            CHECK(std::abs(t.z - base.z) < 1e-10);
            CHECK(std::abs(t.p_analytic - base.p_analytic) < 1e-10);
        }
        CHECK(std::abs(global_moran((-2.0 * x.array()).matrix(), w).I - base.I) < 1e-10);

        // Relabel: new index k holds old zone perm[k].
        std::vector<int> perm(25);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> inv(25);
        for (int k = 0; k < 25; ++k) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = k;
        std::vector<std::string> ids;
        std::vector<std::vector<int>> nb;
        Eigen::VectorXd y(25);
        for (int k = 0; k < 25; ++k) {
            const auto old = static_cast<std::size_t>(perm[static_cast<std::size_t>(k)]);
            ids.push_back(w.zone_ids[old]);
            std::vector<int> row;
            for (int j : w.neighbors[old]) row.push_back(inv[static_cast<std::size_t>(j)]);
            nb.push_back(row);
            y(k) = x(static_cast<Eigen::Index>(old));
        }
        const auto relabeled = weights_from_neighbors(ids, nb);
        CHECK(std::abs(moran_statistic(y, relabeled) - base.I) < 1e-12);
    }
}

TEST_CASE("checkerboard values sit below the null expectation") {
    for (int size : {4, 5, 6}) {
        const auto w = lattice_weights(size, size);
        Eigen::VectorXd x(size * size);
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) x(r * size + c) = (r + c) % 2 == 0 ? 1.0 : -1.0;
        }
        const auto res = global_moran(x, w);
        CHECK(res.I <= res.expected);
    }
}

TEST_CASE("permutation p-values") {
    SUBCASE("two clustered blocks") {
        const auto w = lattice_weights(6, 6);
        Eigen::VectorXd x(36);
        for (int i = 0; i < 36; ++i) x(i) = (i % 6) < 3 ? 1.0 : 0.0;
        const auto p = moran_permutation(x, w, 999, 5);
        CHECK(p.p_value <= 0.005);
        CHECK(p.n_perm == 999);
        CHECK(p.p_value == doctest::Approx((1.0 + p.at_least) / 1000.0));
    }
    SUBCASE("every permutation ties") {
        const auto tri = weights_from_neighbors({"a", "b", "c"}, {{1, 2}, {0, 2}, {0, 1}});
        CHECK(moran_permutation(vec({1, 2, 5}), tri, 99, 1).p_value == 1.0);
    }
    SUBCASE("guards and determinism") {
        const auto w = lattice_weights(4, 4);
        const auto x = Eigen::VectorXd::LinSpaced(16, 0, 1);
        CHECK_THROWS(moran_permutation(x, w, 50, 1));
        CHECK(moran_permutation(x, w, 199, 9).p_value == moran_permutation(x, w, 199, 9).p_value);
        const auto t = moran_test(x, w, 199, 9);
        CHECK(t.p_perm == moran_permutation(x, w, 199, 9).p_value);
        CHECK(t.n_perm == 199);
    }
}

TEST_CASE("local Moran examples") {
    const auto ring = local_moran(vec({1, -1, 1, -1}), ring4(), 99, 1);
    CHECK(ring.I(0) == doctest::Approx(-2.0));
    CHECK(ring.lag(0) == doctest::Approx(-2.0));

    const auto mid = local_moran(vec({1, 2, 3, 2}), ring4(), 99, 1);
    CHECK(mid.I(1) == 0.0);

    auto w = weights_from_neighbors({"a", "b", "c", "d"}, {{1}, {0, 2}, {1}, {}});
    const auto island = local_moran(vec({3, 1, 2, 9}), w, 199, 4);
    CHECK(island.I(3) == 0.0);
    CHECK(island.p(3) == 1.0);
    CHECK(island.cluster[3] == Cluster::NotSignificant);

    CHECK_THROWS_AS(local_moran(vec({1, 1, 1, 1}), ring4(), 99, 1), ConstantValues);
}

TEST_CASE("local Moran finds the centre of a high block") {
    const auto w = lattice_weights(7, 7, ContiguityRule::SharedPoint);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 0.1);
    Eigen::VectorXd x(49);
    for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 7; ++c) x(r * 7 + c) = (r <= 2 && c <= 2 ? 2.0 : 0.0) + g(rng);
    }
    const auto lisa = local_moran(x, w, 999, 2);
    CHECK(lisa.cluster[8] == Cluster::HighHigh);  // (1,1), centre of the block
    CHECK(lisa.p(8) < 0.01);
    CHECK(lisa.z_dev(8) > 0);
    CHECK(lisa.lag(8) > 0);
    // Same seed, same answer.
    const auto again = local_moran(x, w, 999, 2);
    CHECK(again.p == lisa.p);
    for (std::size_t i = 0; i < lisa.cluster.size(); ++i) {
        if (lisa.p(static_cast<Eigen::Index>(i)) >= 0.05) CHECK(lisa.cluster[i] == Cluster::NotSignificant);
    }
}

TEST_CASE("cluster classification rules") {
    const auto c = classify_clusters(vec({1, -1, 1, -1, 1, 1}), vec({1, -1, -1, 1, 0, 1}),
                                     vec({0.01, 0.01, 0.01, 0.01, 0.01, 0.5}), 0.05);
    CHECK(c[0] == Cluster::HighHigh);
    CHECK(c[1] == Cluster::LowLow);
    CHECK(c[2] == Cluster::HighLow);
    CHECK(c[3] == Cluster::LowHigh);
    CHECK(c[4] == Cluster::LowHigh);
    CHECK(c[5] == Cluster::NotSignificant);
    CHECK(to_string(Cluster::HighHigh) == "HighHigh");
}

TEST_CASE("seed mixing") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
    CHECK(mix_seed(7, 3) == mix_seed(7, 3));
}
