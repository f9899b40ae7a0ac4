#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace revgender {

struct Review {
    std::string review_id;   // derived: reviewerID '#' asin '#' timestamp_days
    std::string reviewer_id;
    std::string product_id;
    std::string user_name;
    int rating = 0;          // stars, 1..5
    int64_t upvotes = 0;
    int64_t downvotes = 0;
    std::string text;
    int64_t timestamp_days = 0; // days since 1970-01-01

    bool operator==(const Review&) const = default;
};

struct Product {
    std::string product_id;
    std::vector<std::string> categories; // sorted, unique, flattened from paths
};

struct CorpusStats {
    int64_t review_count = 0;
    int64_t reviewer_count = 0;
    int64_t product_count = 0;
    int64_t category_count = 0;
    double mean_words_per_review = 0.0;
    double mean_rating = 0.0;
    double mean_upvotes = 0.0;
    double mean_downvotes = 0.0;
};

struct IngestCounts {
    int64_t review_lines = 0;
    int64_t reviews_admitted = 0;
    int64_t reviews_skipped = 0;   // malformed + invalid + duplicate ids
    int64_t reviews_malformed = 0;
    int64_t reviews_duplicate = 0;
    int64_t product_lines = 0;
    int64_t products_admitted = 0;
    int64_t products_skipped = 0;
    int64_t products_duplicate = 0; // duplicate asin, last record wins
};

/// Parses one review record (JSON object per line, keys reviewerID,
/// reviewerName, asin, overall, helpful [yes,total], reviewText,
/// unixReviewTime). Returns nullopt with `err` set on malformed records.
std::optional<Review> parse_review_record(std::string_view line, std::string& err);

std::optional<Product> parse_product_record(std::string_view line, std::string& err);

/// Canonical one-line serialization; parse(serialize(r)) == r.
std::string serialize_review(const Review& r);
std::string serialize_product(const Product& p);

int64_t helpfulness_score(const Review& r);

/// In-memory corpus with side indexes; persisted as an append-only record
/// log (reviews.jsonl, products.jsonl) plus meta.json under a directory.
class CorpusStore {
public:
    /// Streams both inputs once; malformed or duplicate records are skipped
    /// and counted. `Source` needs bool next(std::string&).
    template <typename Source>
    static CorpusStore ingest(Source& review_lines, Source& product_lines, IngestCounts& counts) {
        CorpusStore store;
        std::string line, err;
        while (product_lines.next(line)) {
            ++counts.product_lines;
            auto p = parse_product_record(line, err);
            if (!p) {
                ++counts.products_skipped;
                continue;
            }
            if (store.product_index_.count(p->product_id)) ++counts.products_duplicate;
            store.upsert_product(std::move(*p));
            ++counts.products_admitted;
        }
        while (review_lines.next(line)) {
            ++counts.review_lines;
            auto r = parse_review_record(line, err);
            if (!r) {
                ++counts.reviews_malformed;
                ++counts.reviews_skipped;
                continue;
            }
            if (store.review_index_.count(r->review_id)) {
                ++counts.reviews_duplicate;
                ++counts.reviews_skipped;
                continue;
            }
            store.append_review(std::move(*r));
            ++counts.reviews_admitted;
        }
        store.build_category_index();
        store.counts_ = counts;
        return store;
    }

    void save(const std::filesystem::path& dir) const;
    static CorpusStore load(const std::filesystem::path& dir);

    const std::vector<Review>& reviews() const { return reviews_; }
    const Review& review(uint32_t idx) const { return reviews_[idx]; }

    const Review* find_review(std::string_view review_id) const;
    const Product* find_product(std::string_view product_id) const;

    /// Review row indexes for one reviewer, ascending.
    std::span<const uint32_t> reviews_of(std::string_view reviewer_id) const;

    /// Review row indexes whose product carries `category`, ascending.
    std::span<const uint32_t> reviews_in_category(std::string_view category) const;

    std::vector<std::string> reviewer_ids_sorted() const;
    std::vector<std::string> categories_sorted() const;

    /// Most frequent user name on the reviewer's records, ties broken
    /// lexicographically.
    std::string canonical_user_name(std::string_view reviewer_id) const;

    CorpusStats stats() const;
    const IngestCounts& ingest_counts() const { return counts_; }
    size_t product_count() const { return products_.size(); }

private:
    void append_review(Review r);
    void upsert_product(Product p);
    void build_category_index();

    std::vector<Review> reviews_;
    std::vector<Product> products_;
    std::unordered_map<std::string, uint32_t> review_index_;
    std::unordered_map<std::string, uint32_t> product_index_;
    std::unordered_map<std::string, std::vector<uint32_t>> reviewer_index_;
    std::unordered_map<std::string, std::vector<uint32_t>> category_index_;
    IngestCounts counts_;
};

} // namespace revgender
