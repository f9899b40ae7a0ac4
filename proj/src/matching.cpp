#include "matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "rng.hpp"

namespace revgender {

namespace {
constexpr int kLeafSize = 16;
} // namespace

Mat5 covariance_matrix(std::span<const Vec5> vectors) {
    if (vectors.size() < 2) throw UsageError("covariance needs at least two vectors");
    Vec5 mean = Vec5::Zero();
    for (const auto& v : vectors) mean += v;
    mean /= static_cast<double>(vectors.size());
    Mat5 cov = Mat5::Zero();
    for (const auto& v : vectors) {
        const Vec5 d = v - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(vectors.size() - 1);
    return cov;
}

double default_ridge(const Mat5& cov) {
    return 1e-8 * cov.trace() / 5.0;
}

Mat5 whitening_transform(const Mat5& cov, double ridge) {
    Mat5 a = cov;
    a.diagonal().array() += ridge;
    Eigen::LLT<Mat5> llt(a);
    if (llt.info() != Eigen::Success) {
        throw NumericError("covariance factorization failed (even with ridge)");
    }
    const Mat5 lower = llt.matrixL();
    // Forward-substitute L * T = I; T is lower triangular.
    Mat5 t = lower.triangularView<Eigen::Lower>().solve(Mat5::Identity());
    return t;
}

double mahalanobis_distance(const Vec5& u, const Vec5& v, const Mat5& transform) {
    return (transform * (u - v)).norm();
}

std::string_view to_string(PairGroup pg) {
    switch (pg) {
        case PairGroup::PW_PM: return "PW-PM";
        case PairGroup::SW_SM: return "SW-SM";
        case PairGroup::PW_SW: return "PW-SW";
        case PairGroup::PM_SM: return "PM-SM";
    }
    return "PW-PM";
}

std::optional<PairGroup> pair_group_from_string(std::string_view s) {
    if (s == "PW-PM") return PairGroup::PW_PM;
    if (s == "SW-SM") return PairGroup::SW_SM;
    if (s == "PW-SW") return PairGroup::PW_SW;
    if (s == "PM-SM") return PairGroup::PM_SM;
    return std::nullopt;
}

std::pair<ReviewerGroup, ReviewerGroup> pair_group_sides(PairGroup pg) {
    switch (pg) {
        case PairGroup::PW_PM:
            return {ReviewerGroup::PerformingWoman, ReviewerGroup::PerformingMan};
        case PairGroup::SW_SM:
            return {ReviewerGroup::SignalingWoman, ReviewerGroup::SignalingMan};
        case PairGroup::PW_SW:
            return {ReviewerGroup::PerformingWoman, ReviewerGroup::SignalingWoman};
        case PairGroup::PM_SM:
            return {ReviewerGroup::PerformingMan, ReviewerGroup::SignalingMan};
    }
    return {ReviewerGroup::Unclassified, ReviewerGroup::Unclassified};
}

MatchPool::MatchPool(std::string category, ReviewerGroup group, std::vector<PoolEntry> entries,
                     const Mat5& transform, bool build_index)
    : category_(std::move(category)), group_(group), transform_(transform) {
    std::sort(entries.begin(), entries.end(),
              [](const PoolEntry& a, const PoolEntry& b) { return a.review_id < b.review_id; });
    ids_.reserve(entries.size());
    raw_.reserve(entries.size());
    whitened_.resize(5, static_cast<Eigen::Index>(entries.size()));
    for (size_t i = 0; i < entries.size(); ++i) {
        ids_.push_back(std::move(entries[i].review_id));
        raw_.push_back(entries[i].x);
        whitened_.col(static_cast<Eigen::Index>(i)) = transform_ * entries[i].x;
    }
    if (build_index && !ids_.empty()) {
        perm_.resize(ids_.size());
        std::iota(perm_.begin(), perm_.end(), 0);
        nodes_.reserve(4 * (ids_.size() / kLeafSize + 1));
        root_ = build_node(0, static_cast<int>(ids_.size()));
    }
}

int MatchPool::build_node(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return idx;

    // Split on the axis with the largest spread at the median.
    int axis = 0;
    double best_spread = -1.0;
    for (int a = 0; a < 5; ++a) {
        double lo = whitened_(a, perm_[static_cast<size_t>(begin)]);
        double hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            const double x = whitened_(a, perm_[static_cast<size_t>(i)]);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            axis = a;
        }
    }
    if (best_spread <= 0.0) return idx; // all points identical; keep as leaf

    const int mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](int a, int b) {
                         const double xa = whitened_(axis, a);
                         const double xb = whitened_(axis, b);
                         if (xa != xb) return xa < xb;
                         return a < b;
                     });
    const double split = whitened_(axis, perm_[static_cast<size_t>(mid)]);
    const int left = build_node(begin, mid);
    const int right = build_node(mid, end);
    nodes_[static_cast<size_t>(idx)].axis = axis;
    nodes_[static_cast<size_t>(idx)].split = split;
    nodes_[static_cast<size_t>(idx)].left = left;
    nodes_[static_cast<size_t>(idx)].right = right;
    return idx;
}

void MatchPool::search(int node_idx, const Vec5& wq, size_t exclude, double& best_d2,
                       size_t& best) const {
    const Node& node = nodes_[static_cast<size_t>(node_idx)];
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const auto entry = static_cast<size_t>(perm_[static_cast<size_t>(i)]);
            if (entry == exclude) continue;
            const double d2 =
                (whitened_.col(static_cast<Eigen::Index>(entry)) - wq).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && entry < best)) {
                best_d2 = d2;
                best = entry;
            }
        }
        return;
    }
    const double delta = wq[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, wq, exclude, best_d2, best);
    // On exact equality we still descend: an equal-distance entry with a
    // smaller id may sit on the other side.
    if (delta * delta <= best_d2) search(far, wq, exclude, best_d2, best);
}

size_t MatchPool::exclude_index(std::string_view exclude_id) const {
    if (exclude_id.empty()) return ids_.size();
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), exclude_id);
    if (it != ids_.end() && *it == exclude_id) {
        return static_cast<size_t>(it - ids_.begin());
    }
    return ids_.size();
}

std::optional<MatchPool::Hit> MatchPool::finish(double best_d2, size_t best) const {
    if (best >= ids_.size()) return std::nullopt;
    return Hit{best, std::sqrt(best_d2)};
}

std::optional<MatchPool::Hit> MatchPool::nearest(const Vec5& raw_query,
                                                 std::string_view exclude_id) const {
    if (ids_.empty()) return std::nullopt;
    if (root_ < 0) return nearest_bruteforce(raw_query, exclude_id);
    const Vec5 wq = transform_ * raw_query;
    double best_d2 = std::numeric_limits<double>::infinity();
    size_t best = ids_.size();
    search(root_, wq, exclude_index(exclude_id), best_d2, best);
    return finish(best_d2, best);
}

std::optional<MatchPool::Hit> MatchPool::nearest_bruteforce(const Vec5& raw_query,
                                                            std::string_view exclude_id) const {
    if (ids_.empty()) return std::nullopt;
    const Vec5 wq = transform_ * raw_query;
    const size_t exclude = exclude_index(exclude_id);
    double best_d2 = std::numeric_limits<double>::infinity();
    size_t best = ids_.size();
    for (size_t i = 0; i < ids_.size(); ++i) {
        if (i == exclude) continue;
        const double d2 = (whitened_.col(static_cast<Eigen::Index>(i)) - wq).squaredNorm();
        if (d2 < best_d2) { // scanning in id order, so strict < keeps the smaller id on ties
            best_d2 = d2;
            best = i;
        }
    }
    return finish(best_d2, best);
}

SampleMatchResult sample_and_match(const MatchPool& side1, const MatchPool& side2, PairGroup pg,
                                   size_t n, uint64_t seed) {
    if (n == 0) throw UsageError("sample size must be positive");
    if (side1.empty() && side2.empty()) {
        throw DataError("both pools empty for pair group " + std::string(to_string(pg)) +
                        " in category " + side1.category());
    }
    const size_t total = side1.size() + side2.size();
    const size_t draw = std::min(n, total);

    // Seeded partial Fisher-Yates over the union (side1 entries first).
    std::vector<uint32_t> universe(total);
    std::iota(universe.begin(), universe.end(), 0u);
    Rng rng(seed_combine(seed, fnv1a64(to_string(pg)) ^ fnv1a64(side1.category())));
    SampleMatchResult result;
    for (size_t i = 0; i < draw; ++i) {
        const size_t j = i + rng.below(total - i);
        std::swap(universe[i], universe[j]);
        const uint32_t pick = universe[i];
        const bool from_side1 = pick < side1.size();
        const MatchPool& mine = from_side1 ? side1 : side2;
        const MatchPool& other = from_side1 ? side2 : side1;
        const size_t local = from_side1 ? pick : pick - side1.size();
        const auto hit = other.nearest(mine.raw_at(local), mine.id_at(local));
        if (!hit) {
            ++result.unmatched;
            continue;
        }
        MatchedPair pair;
        pair.treated_id = mine.id_at(local);
        pair.control_id = other.id_at(hit->index);
        pair.distance = hit->distance;
        pair.category = side1.category();
        pair.pair_group = pg;
        pair.treated_group = mine.group();
        result.pairs.push_back(std::move(pair));
    }
    return result;
}

BalanceReport balance_report(std::span<const MatchedPair> pairs, const ConfounderLookup& lookup,
                             int confounder_index, int bin_count) {
    if (pairs.empty()) throw UsageError("balance report needs at least one pair");
    if (confounder_index < 0 || confounder_index > 4) {
        throw UsageError("confounder index must be in [0, 4]");
    }
    std::vector<double> side1, side2;
    side1.reserve(pairs.size());
    side2.reserve(pairs.size());
    for (const auto& p : pairs) {
        const auto [g1, _] = pair_group_sides(p.pair_group);
        const bool treated_is_side1 = p.treated_group == g1;
        const double tv = lookup(p.treated_id)[confounder_index];
        const double cv = lookup(p.control_id)[confounder_index];
        side1.push_back(treated_is_side1 ? tv : cv);
        side2.push_back(treated_is_side1 ? cv : tv);
    }
    auto moments = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        if (xs.size() > 1) var /= static_cast<double>(xs.size() - 1);
        return std::pair{mean, var};
    };
    BalanceReport report;
    report.confounder_index = confounder_index;
    std::tie(report.side1_mean, report.side1_variance) = moments(side1);
    std::tie(report.side2_mean, report.side2_variance) = moments(side2);

    double lo = side1[0], hi = side1[0];
    for (double x : side1) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    for (double x : side2) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double width = (hi - lo) / bin_count;
    report.bins.resize(static_cast<size_t>(bin_count));
    for (int b = 0; b < bin_count; ++b) {
        report.bins[static_cast<size_t>(b)].lo = lo + b * width;
        report.bins[static_cast<size_t>(b)].hi = lo + (b + 1) * width;
    }
    auto drop = [&](double x, bool first_side) {
        int b = static_cast<int>((x - lo) / width);
        b = std::clamp(b, 0, bin_count - 1);
        if (first_side) ++report.bins[static_cast<size_t>(b)].side1_count;
        else ++report.bins[static_cast<size_t>(b)].side2_count;
    };
    for (double x : side1) drop(x, true);
    for (double x : side2) drop(x, false);
    return report;
}

} // namespace revgender
