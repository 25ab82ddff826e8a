#include "stz/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "stz/diagnostics.hpp"
#include "stz/errors.hpp"

namespace stz {

std::string to_string(ContiguityRule r) { return r == ContiguityRule::SharedEdge ? "SharedEdge" : "SharedPoint"; }
std::string to_string(WeightStyle s) { return s == WeightStyle::Binary ? "Binary" : "RowStandardized"; }

std::string to_string(Cluster c) {
    switch (c) {
        case Cluster::HighHigh: return "HighHigh";
        case Cluster::LowLow: return "LowLow";
        case Cluster::HighLow: return "HighLow";
        case Cluster::LowHigh: return "LowHigh";
        case Cluster::NotSignificant: return "NotSignificant";
    }
    return "NotSignificant";
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Eigen::MatrixXd SpatialWeights::dense() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(size(), size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        for (std::size_t k = 0; k < neighbors[i].size(); ++k) {
            w(static_cast<Eigen::Index>(i), neighbors[i][k]) = weights[i][k];
        }
    }
    return w;
}

Eigen::VectorXd SpatialWeights::lag(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    if (v.size() != size()) throw DimensionMismatch("lag: vector length differs from zone count");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < neighbors[i].size(); ++k) s += weights[i][k] * v(neighbors[i][k]);
        out(static_cast<Eigen::Index>(i)) = s;
    }
    return out;
}

SpatialWeights weights_from_neighbors(std::vector<std::string> zone_ids, std::vector<std::vector<int>> neighbors,
                                      WeightStyle style) {
    const auto n = static_cast<int>(zone_ids.size());
    if (static_cast<int>(neighbors.size()) != n) throw DimensionMismatch("one neighbor list per zone is required");
    for (int i = 0; i < n; ++i) {
        auto& nb = neighbors[static_cast<std::size_t>(i)];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        for (int j : nb) {
            if (j < 0 || j >= n) throw Error("neighbor index out of range");
            if (j == i) throw Error("zone '" + zone_ids[static_cast<std::size_t>(i)] + "' lists itself as a neighbor");
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j : neighbors[static_cast<std::size_t>(i)]) {
            const auto& back = neighbors[static_cast<std::size_t>(j)];
            if (!std::binary_search(back.begin(), back.end(), i)) {
                throw Error("neighbor relation is not symmetric for '" + zone_ids[static_cast<std::size_t>(i)] + "' and '" +
                            zone_ids[static_cast<std::size_t>(j)] + "'");
            }
        }
    }

    SpatialWeights w;
    w.zone_ids = std::move(zone_ids);
    w.neighbors = std::move(neighbors);
    w.style = style;
    w.weights.resize(w.neighbors.size());
    for (std::size_t i = 0; i < w.neighbors.size(); ++i) {
        const auto k = w.neighbors[i].size();
        if (k == 0) w.islands.push_back(w.zone_ids[i]);
        const double v = style == WeightStyle::Binary ? 1.0 : (k > 0 ? 1.0 / static_cast<double>(k) : 0.0);
        w.weights[i].assign(k, v);
        for (double x : w.weights[i]) w.s0 += x;
    }
    return w;
}

SpatialWeights SpatialWeights::subset(const std::vector<std::string>& ids) const {
    std::map<std::string, int> pos;
    for (std::size_t i = 0; i < zone_ids.size(); ++i) pos[zone_ids[i]] = static_cast<int>(i);
    std::map<int, int> remap;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const auto it = pos.find(ids[k]);
        if (it == pos.end()) throw DimensionMismatch("zone '" + ids[k] + "' is not in the weights");
        remap[it->second] = static_cast<int>(k);
    }
    std::vector<std::vector<int>> nb(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        for (int j : neighbors[static_cast<std::size_t>(pos.at(ids[k]))]) {
            const auto it = remap.find(j);
            if (it != remap.end()) nb[k].push_back(it->second);
        }
    }
    return weights_from_neighbors(ids, std::move(nb), style);
}

SpatialWeights build_contiguity(std::span<const ZoneGeometry> geometries, ContiguityRule rule, WeightStyle style,
                                double tol) {
    std::vector<ZoneGeometry> clean;
    std::vector<std::string> ids;
    for (const auto& g : geometries) {
        if (std::find(ids.begin(), ids.end(), g.zone_id) != ids.end()) {
            throw InvalidGeometry(g.zone_id, "duplicate zone id");
        }
        clean.push_back(clean_geometry(g, tol));
        ids.push_back(g.zone_id);
    }
    std::vector<std::vector<int>> nb(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        for (std::size_t j = i + 1; j < clean.size(); ++j) {
            const Contact c = boundary_contact(clean[i], clean[j], tol);
            const bool linked = c == Contact::Edge || (rule == ContiguityRule::SharedPoint && c == Contact::Point);
            if (linked) {
                nb[i].push_back(static_cast<int>(j));
                nb[j].push_back(static_cast<int>(i));
            }
        }
    }
    return weights_from_neighbors(std::move(ids), std::move(nb), style);
}

SpatialWeights lattice_weights(int rows, int cols, ContiguityRule rule, WeightStyle style) {
    std::vector<std::string> ids;
    std::vector<std::vector<int>> nb(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            ids.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    if (rule == ContiguityRule::SharedEdge && dr != 0 && dc != 0) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                    nb[static_cast<std::size_t>(r * cols + c)].push_back(rr * cols + cc);
                }
            }
        }
    }
    return weights_from_neighbors(std::move(ids), std::move(nb), style);
}

namespace {

// Deviations from the mean; throws when the values carry no variation.
Eigen::VectorXd deviations(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w, double& ss) {
    if (values.size() != w.size()) {
        throw DimensionMismatch("got " + std::to_string(values.size()) + " values for " + std::to_string(w.size()) +
                                " zones");
    }
    if (values.size() < 3) throw DimensionMismatch("Moran's I needs at least 3 zones");
    if (!values.allFinite()) throw Error("values must be finite");
    Eigen::VectorXd dev = values.array() - values.mean();
    ss = dev.squaredNorm();
    const double peak = values.cwiseAbs().maxCoeff();
    const double floor = static_cast<double>(values.size()) *
                         std::pow(64.0 * std::numeric_limits<double>::epsilon() * peak, 2);
    if (!(ss > floor)) throw ConstantValues();
    return dev;
}

double cross_product(const Eigen::VectorXd& dev, const SpatialWeights& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.neighbors.size(); ++i) {
        double lag = 0.0;
        for (std::size_t k = 0; k < w.neighbors[i].size(); ++k) lag += w.weights[i][k] * dev(w.neighbors[i][k]);
        s += dev(static_cast<Eigen::Index>(i)) * lag;
    }
    return s;
}

// Unbiased draw from [0, bound) independent of the standard library's
// distribution implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace

double moran_statistic(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w) {
    double ss = 0.0;
    const Eigen::VectorXd dev = deviations(values, w, ss);
    if (!(w.s0 > 0)) throw Error("weights have no neighbor pairs");
    return static_cast<double>(values.size()) / w.s0 * cross_product(dev, w) / ss;
}

MoranResult global_moran(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w,
                         const MoranOptions& opts) {
    double ss = 0.0;
    const Eigen::VectorXd dev = deviations(values, w, ss);
    if (!(w.s0 > 0)) throw Error("weights have no neighbor pairs");
    const double n = static_cast<double>(values.size());

    MoranResult res;
    res.n = values.size();
    res.I = n / w.s0 * cross_product(dev, w) / ss;
    res.expected = -1.0 / (n - 1.0);

    const Eigen::MatrixXd wd = w.dense();
    const double s0 = w.s0;
    const double s1 = 0.5 * (wd + wd.transpose()).array().square().sum();
    const double s2 = (wd.rowwise().sum() + wd.colwise().sum().transpose()).array().square().sum();
    const double s02 = s0 * s0;
    double e_i2 = 0.0;
    if (opts.variance == VarianceAssumption::Randomization && res.n >= 4) {
        const double b2 = n * dev.array().pow(4).sum() / (ss * ss);
        e_i2 = (n * ((n * n - 3 * n + 3) * s1 - n * s2 + 3 * s02) - b2 * ((n * n - n) * s1 - 2 * n * s2 + 6 * s02)) /
               ((n - 1) * (n - 2) * (n - 3) * s02);
    } else {
        e_i2 = (n * n * s1 - n * s2 + 3 * s02) / (s02 * (n * n - 1));
    }
    res.variance = e_i2 - res.expected * res.expected;
    res.z = (res.I - res.expected) / std::sqrt(res.variance);
    res.p_analytic = opts.alternative == Alternative::Greater ? normal_sf(res.z) : 2.0 * normal_sf(std::abs(res.z));
    res.p_analytic = std::clamp(res.p_analytic, 0.0, 1.0);
    return res;
}

PermutationResult moran_permutation(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w,
                                    int n_perm, std::uint64_t seed) {
    if (n_perm < 99) throw Error("at least 99 permutations are required");
    double ss = 0.0;
    Eigen::VectorXd dev = deviations(values, w, ss);
    const double observed = cross_product(dev, w);
    const double tol = 1e-12 * std::max(1.0, std::abs(observed));

    std::mt19937_64 rng(seed);
    PermutationResult res;
    res.n_perm = n_perm;
    const auto n = static_cast<std::uint64_t>(dev.size());
    for (int r = 0; r < n_perm; ++r) {
        for (std::uint64_t i = n - 1; i > 0; --i) {
            std::swap(dev(static_cast<Eigen::Index>(i)), dev(static_cast<Eigen::Index>(bounded(rng, i + 1))));
        }
        if (cross_product(dev, w) >= observed - tol) ++res.at_least;
    }
    res.p_value = (1.0 + res.at_least) / (1.0 + n_perm);
    return res;
}

MoranResult moran_test(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w, int n_perm,
                       std::uint64_t seed, const MoranOptions& opts) {
    MoranResult res = global_moran(values, w, opts);
    const PermutationResult perm = moran_permutation(values, w, n_perm, seed);
    res.p_perm = perm.p_value;
    res.n_perm = perm.n_perm;
    return res;
}

std::vector<Cluster> classify_clusters(const Eigen::Ref<const Eigen::VectorXd>& z_dev,
                                       const Eigen::Ref<const Eigen::VectorXd>& lag,
                                       const Eigen::Ref<const Eigen::VectorXd>& p, double alpha) {
    if (lag.size() != z_dev.size() || p.size() != z_dev.size()) throw DimensionMismatch("classify: inputs misaligned");
    std::vector<Cluster> out;
    out.reserve(static_cast<std::size_t>(z_dev.size()));
    for (Eigen::Index i = 0; i < z_dev.size(); ++i) {
        if (!(p(i) < alpha)) {
            out.push_back(Cluster::NotSignificant);
        } else if (z_dev(i) > 0 && lag(i) > 0) {
            out.push_back(Cluster::HighHigh);
        } else if (z_dev(i) < 0 && lag(i) < 0) {
            out.push_back(Cluster::LowLow);
        } else if (z_dev(i) > 0 && lag(i) < 0) {
            out.push_back(Cluster::HighLow);
        } else {
            out.push_back(Cluster::LowHigh);
        }
    }
    return out;
}

LisaResult local_moran(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w, int n_perm,
                       std::uint64_t seed, double alpha) {
    if (n_perm < 99) throw Error("at least 99 permutations are required");
    double ss = 0.0;
    const Eigen::VectorXd dev = deviations(values, w, ss);
    const Eigen::Index n = dev.size();

    LisaResult res;
    res.zone_ids = w.zone_ids;
    res.alpha = alpha;
    res.z_dev = dev;
    res.lag = w.lag(dev);
    res.I = Eigen::VectorXd::Zero(n);
    res.p = Eigen::VectorXd::Ones(n);

    std::vector<int> pool(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nb = w.neighbors[static_cast<std::size_t>(i)];
        const auto& wt = w.weights[static_cast<std::size_t>(i)];
        const double s2 = (ss - dev(i) * dev(i)) / static_cast<double>(n - 1);
        if (nb.empty() || dev(i) == 0.0 || !(s2 > 0)) continue;
        const double scale = dev(i) / s2;
        res.I(i) = scale * res.lag(i);

        std::iota(pool.begin(), pool.begin() + i, 0);
        std::iota(pool.begin() + i, pool.end(), static_cast<int>(i) + 1);
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        const double tol = 1e-12 * std::max(1.0, std::abs(res.I(i)));
        const std::size_t k = nb.size();
        int larger = 0;
        for (int r = 0; r < n_perm; ++r) {
            double lag = 0.0;
            // Partial Fisher-Yates: the first k slots become the drawn neighbors.
            for (std::size_t m = 0; m < k; ++m) {
                const std::size_t pick = m + bounded(rng, pool.size() - m);
                std::swap(pool[m], pool[pick]);
                lag += wt[m] * dev(pool[m]);
            }
            if (scale * lag >= res.I(i) - tol) ++larger;
        }
        if (n_perm - larger < larger) larger = n_perm - larger;
        res.p(i) = (1.0 + larger) / (1.0 + n_perm);
    }
    res.cluster = classify_clusters(res.z_dev, res.lag, res.p, alpha);
    return res;
}

}  // namespace stz
