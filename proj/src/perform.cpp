#include "perform.hpp"

#include "errors.hpp"
#include "rng.hpp"

namespace revgender {

std::string_view to_string(ReviewerGroup g) {
    switch (g) {
        case ReviewerGroup::SignalingMan: return "SM";
        case ReviewerGroup::SignalingWoman: return "SW";
        case ReviewerGroup::PerformingMan: return "PM";
        case ReviewerGroup::PerformingWoman: return "PW";
        case ReviewerGroup::Unclassified: return "UN";
    }
    return "UN";
}

std::optional<ReviewerGroup> reviewer_group_from_string(std::string_view s) {
    if (s == "SM") return ReviewerGroup::SignalingMan;
    if (s == "SW") return ReviewerGroup::SignalingWoman;
    if (s == "PM") return ReviewerGroup::PerformingMan;
    if (s == "PW") return ReviewerGroup::PerformingWoman;
    if (s == "UN") return ReviewerGroup::Unclassified;
    return std::nullopt;
}

PerformanceLabel aggregate_user_label(std::span<const double> probabilities, double threshold) {
    if (!(threshold > 0.5 && threshold <= 1.0)) {
        throw UsageError("aggregation threshold must be in (0.5, 1]");
    }
    PerformanceLabel label;
    for (double p : probabilities) {
        if (p >= threshold) ++label.votes_male;
        else if (p <= 1.0 - threshold) ++label.votes_female;
        else ++label.abstentions;
    }
    if (label.votes_male > label.votes_female) label.kind = PerformanceKind::PerformMale;
    else if (label.votes_female > label.votes_male) label.kind = PerformanceKind::PerformFemale;
    else label.kind = PerformanceKind::Indeterminate; // tie or no votes cast
    return label;
}

ReviewerGroup assign_group(GenderSignal signal, const PerformanceLabel& perf) {
    switch (signal) {
        case GenderSignal::SignalMale: return ReviewerGroup::SignalingMan;
        case GenderSignal::SignalFemale: return ReviewerGroup::SignalingWoman;
        case GenderSignal::NoSignal: break;
    }
    switch (perf.kind) {
        case PerformanceKind::PerformMale: return ReviewerGroup::PerformingMan;
        case PerformanceKind::PerformFemale: return ReviewerGroup::PerformingWoman;
        case PerformanceKind::Indeterminate: return ReviewerGroup::Unclassified;
    }
    return ReviewerGroup::Unclassified;
}

bool reviewer_in_train_split(std::string_view reviewer_id, double fraction, uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw UsageError("split fraction must be in (0, 1)");
    }
    const uint64_t h = splitmix64(seed_combine(seed, fnv1a64(reviewer_id)));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < fraction;
}

} // namespace revgender
