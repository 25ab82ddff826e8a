#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stz/geometry.hpp"

namespace stz {

enum class ContiguityRule { SharedEdge, SharedPoint };
enum class WeightStyle { Binary, RowStandardized };

std::string to_string(ContiguityRule r);
std::string to_string(WeightStyle s);

/// Sparse contiguity weights. neighbors[i] is sorted; weights[i][k] is the
/// weight of the pair (i, neighbors[i][k]).
struct SpatialWeights {
    std::vector<std::string> zone_ids;
    std::vector<std::vector<int>> neighbors;
    std::vector<std::vector<double>> weights;
    double s0 = 0.0;
    WeightStyle style = WeightStyle::Binary;
    /// Zones with no neighbors; retained in the structure.
    std::vector<std::string> islands;

    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(zone_ids.size()); }
    Eigen::MatrixXd dense() const;
    /// (W v)_i = sum_j w_ij v_j
    Eigen::VectorXd lag(const Eigen::Ref<const Eigen::VectorXd>& v) const;
    /// Restriction to the given zones (in that order), restyled.
    SpatialWeights subset(const std::vector<std::string>& ids) const;
};

/// Builds weights from a symmetric neighbor relation. Throws Error on
/// asymmetric pairs, self-neighbors or out-of-range indices.
SpatialWeights weights_from_neighbors(std::vector<std::string> zone_ids, std::vector<std::vector<int>> neighbors,
                                      WeightStyle style = WeightStyle::Binary);

/// Zones are neighbors when their boundaries share a segment (SharedEdge) or
/// at least one point (SharedPoint), within tol coordinate units.
SpatialWeights build_contiguity(std::span<const ZoneGeometry> geometries, ContiguityRule rule = ContiguityRule::SharedEdge,
                                WeightStyle style = WeightStyle::Binary, double tol = 1e-9);

/// Rook (SharedEdge) or queen (SharedPoint) neighbors on a rows x cols lattice.
SpatialWeights lattice_weights(int rows, int cols, ContiguityRule rule = ContiguityRule::SharedEdge,
                               WeightStyle style = WeightStyle::Binary);

enum class Alternative { Greater, TwoSided };
enum class VarianceAssumption { Randomization, Normality };

struct MoranOptions {
    Alternative alternative = Alternative::Greater;
    VarianceAssumption variance = VarianceAssumption::Randomization;
};

struct MoranResult {
    double I = 0.0;
    double expected = 0.0;
    double variance = 0.0;
    double z = 0.0;
    double p_analytic = 1.0;
    double p_perm = 1.0;
    int n_perm = 0;
    Eigen::Index n = 0;
    std::string window_label;
};

/// Global Moran's I, (sum_ij w_ij z_i z_j / S0) / (sum_i z_i^2 / n) on mean deviations.
double moran_statistic(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w);

/// Analytic part: I, E[I] = -1/(n-1), variance, z and p. Needs n >= 3; the
/// randomization variance needs n >= 4 and falls back to normality at n = 3.
MoranResult global_moran(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w,
                         const MoranOptions& opts = {});

struct PermutationResult {
    double p_value = 1.0;
    int n_perm = 0;
    int at_least = 0;  ///< permutations with I* >= I
};

/// Pseudo p-value (1 + #{I* >= I}) / (1 + n_perm) over random relabelings.
PermutationResult moran_permutation(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w,
                                    int n_perm, std::uint64_t seed);

/// global_moran plus the permutation p-value.
MoranResult moran_test(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w, int n_perm,
                       std::uint64_t seed, const MoranOptions& opts = {});

enum class Cluster { HighHigh, LowLow, HighLow, LowHigh, NotSignificant };

std::string to_string(Cluster c);

struct LisaResult {
    std::vector<std::string> zone_ids;
    Eigen::VectorXd I;
    Eigen::VectorXd z_dev;  ///< value minus the mean over all zones
    Eigen::VectorXd lag;    ///< sum_j w_ij z_dev_j
    Eigen::VectorXd p;
    std::vector<Cluster> cluster;
    double alpha = 0.05;
};

/// Local Moran's I_i = (z_i - mean)/S_i^2 * sum_{j != i} w_ij (z_j - mean) with
/// S_i^2 = sum_{j != i} (z_j - mean)^2 / (n - 1). Each p_i comes from a
/// conditional permutation: z_i stays put and its neighbors are drawn from
/// the other n - 1 values. The count is folded toward the observed tail.
LisaResult local_moran(const Eigen::Ref<const Eigen::VectorXd>& values, const SpatialWeights& w, int n_perm,
                       std::uint64_t seed, double alpha = 0.05);

/// HH: dev > 0, lag > 0; LL: dev < 0, lag < 0; HL: dev > 0, lag < 0; LH
/// otherwise. NotSignificant whenever p >= alpha.
std::vector<Cluster> classify_clusters(const Eigen::Ref<const Eigen::VectorXd>& z_dev,
                                       const Eigen::Ref<const Eigen::VectorXd>& lag,
                                       const Eigen::Ref<const Eigen::VectorXd>& p, double alpha);

/// SplitMix64 step, used to derive independent seeds from one root seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace stz
