#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signal.hpp"

namespace revgender {

enum class PerformanceKind { PerformMale, PerformFemale, Indeterminate };

struct PerformanceLabel {
    PerformanceKind kind = PerformanceKind::Indeterminate;
    int votes_male = 0;
    int votes_female = 0;
    int abstentions = 0;
};

enum class ReviewerGroup { SignalingMan, SignalingWoman, PerformingMan, PerformingWoman, Unclassified };

std::string_view to_string(ReviewerGroup g);
std::optional<ReviewerGroup> reviewer_group_from_string(std::string_view s);

/// Per-review probabilities cast votes (male if p >= threshold, female if
/// p <= 1-threshold, abstain otherwise); strict majority of cast votes wins,
/// ties and empty votes are Indeterminate.
PerformanceLabel aggregate_user_label(std::span<const double> probabilities,
                                      double threshold = 0.7);

/// Name signal dominates; performance only classifies non-signaling users.
ReviewerGroup assign_group(GenderSignal signal, const PerformanceLabel& perf);

/// Deterministic user-level split: a reviewer lands in the train side when
/// hash(seed, reviewer_id) maps below `fraction`. All of a reviewer's
/// reviews stay on one side.
bool reviewer_in_train_split(std::string_view reviewer_id, double fraction, uint64_t seed);

} // namespace revgender
