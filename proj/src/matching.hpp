#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "perform.hpp"

namespace revgender {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Unbiased sample covariance (divisor n-1) over the five confounder
/// components. Throws UsageError with fewer than two vectors.
Mat5 covariance_matrix(std::span<const Vec5> vectors);

/// Inverse lower-triangular Cholesky factor of (cov + ridge*I), so that
/// ||T(u-v)|| equals the Mahalanobis distance. Throws NumericError when the
/// ridged matrix still fails to factor.
Mat5 whitening_transform(const Mat5& cov, double ridge);

/// Default ridge: 1e-8 * trace/5, guarding degenerate covariances.
double default_ridge(const Mat5& cov);

double mahalanobis_distance(const Vec5& u, const Vec5& v, const Mat5& transform);

enum class PairGroup { PW_PM, SW_SM, PW_SW, PM_SM };

std::string_view to_string(PairGroup pg);
std::optional<PairGroup> pair_group_from_string(std::string_view s);
constexpr std::array<PairGroup, 4> kAllPairGroups = {PairGroup::PW_PM, PairGroup::SW_SM,
                                                     PairGroup::PW_SW, PairGroup::PM_SM};

/// (side1, side2) as named in the tag, e.g. PW_PM -> (PerformingWoman, PerformingMan).
std::pair<ReviewerGroup, ReviewerGroup> pair_group_sides(PairGroup pg);

struct PoolEntry {
    std::string review_id;
    Vec5 x;
};

struct MatchedPair {
    std::string treated_id;
    std::string control_id;
    double distance = 0.0;
    std::string category;
    PairGroup pair_group = PairGroup::PW_PM;
    ReviewerGroup treated_group = ReviewerGroup::Unclassified;
};

/// All reviews of one (category, group), whitened once. Queries run against
/// an exact kd-tree; a brute-force scan with identical tie-breaking is kept
/// as a fallback (and as the oracle's reference semantics): ties in distance
/// resolve to the smaller review_id.
class MatchPool {
public:
    MatchPool(std::string category, ReviewerGroup group, std::vector<PoolEntry> entries,
              const Mat5& transform, bool build_index = true);

    size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const std::string& category() const { return category_; }
    ReviewerGroup group() const { return group_; }
    const Mat5& transform() const { return transform_; }
    const std::string& id_at(size_t i) const { return ids_[i]; }
    const Vec5& raw_at(size_t i) const { return raw_[i]; }

    struct Hit {
        size_t index = 0;
        double distance = 0.0;
    };

    /// Nearest entry to the (raw-coordinate) query, skipping `exclude_id`.
    std::optional<Hit> nearest(const Vec5& raw_query, std::string_view exclude_id = {}) const;

    /// Linear-scan path with the same contract; always available.
    std::optional<Hit> nearest_bruteforce(const Vec5& raw_query,
                                          std::string_view exclude_id = {}) const;

private:
    struct Node {
        int axis = -1; // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0;
    };

    int build_node(int begin, int end);
    void search(int node, const Vec5& wq, size_t exclude, double& best_d2, size_t& best) const;
    std::optional<Hit> finish(double best_d2, size_t best) const;
    size_t exclude_index(std::string_view exclude_id) const;

    std::string category_;
    ReviewerGroup group_;
    Mat5 transform_;
    std::vector<std::string> ids_;   // ascending; index order breaks distance ties
    std::vector<Vec5> raw_;
    Eigen::Matrix<double, 5, Eigen::Dynamic> whitened_;
    std::vector<int> perm_;          // kd-tree leaf ordering over entry indexes
    std::vector<Node> nodes_;
    int root_ = -1;
};

struct SampleMatchResult {
    std::vector<MatchedPair> pairs;
    int64_t unmatched = 0;
};

/// Draws up to n treated reviews (seeded, without replacement) from the
/// union of the two sides, preserving their natural proportions, and matches
/// each against the opposite side's full pool (controls may repeat).
/// Throws DataError when both pools are empty.
SampleMatchResult sample_and_match(const MatchPool& side1, const MatchPool& side2, PairGroup pg,
                                   size_t n, uint64_t seed);

struct BalanceBin {
    double lo = 0.0, hi = 0.0;
    int64_t side1_count = 0, side2_count = 0;
};

struct BalanceReport {
    int confounder_index = 0;
    double side1_mean = 0.0, side1_variance = 0.0;
    double side2_mean = 0.0, side2_variance = 0.0;
    std::vector<BalanceBin> bins;
};

using ConfounderLookup = std::function<Vec5(const std::string& review_id)>;

/// Histogram plus mean/variance of one confounder on each side of the pairs.
/// Throws UsageError on an empty pair list.
BalanceReport balance_report(std::span<const MatchedPair> pairs, const ConfounderLookup& lookup,
                             int confounder_index, int bin_count = 20);

} // namespace revgender
