#include "corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "lineio.hpp"
#include "textutil.hpp"

namespace revgender {

using nlohmann::json;

namespace {

constexpr int64_t kSecondsPerDay = 86400;

std::string make_review_id(const std::string& reviewer, const std::string& asin, int64_t days) {
    return reviewer + "#" + asin + "#" + std::to_string(days);
}

bool get_string(const json& j, const char* key, std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

} // namespace

std::optional<Review> parse_review_record(std::string_view line, std::string& err) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        err = "not a JSON object";
        return std::nullopt;
    }
    Review r;
    if (!get_string(j, "reviewerID", r.reviewer_id) || r.reviewer_id.empty()) {
        err = "missing reviewerID";
        return std::nullopt;
    }
    if (!get_string(j, "asin", r.product_id) || r.product_id.empty()) {
        err = "missing asin";
        return std::nullopt;
    }
    if (!get_string(j, "reviewerName", r.user_name)) {
        err = "missing reviewerName";
        return std::nullopt;
    }
    if (!get_string(j, "reviewText", r.text)) {
        err = "missing reviewText";
        return std::nullopt;
    }
    auto overall = j.find("overall");
    if (overall == j.end() || !overall->is_number()) {
        err = "missing overall";
        return std::nullopt;
    }
    const double stars = overall->get<double>();
    r.rating = static_cast<int>(stars);
    if (static_cast<double>(r.rating) != stars || r.rating < 1 || r.rating > 5) {
        err = "overall out of range";
        return std::nullopt;
    }
    auto helpful = j.find("helpful");
    if (helpful == j.end() || !helpful->is_array() || helpful->size() != 2 ||
        !(*helpful)[0].is_number_integer() || !(*helpful)[1].is_number_integer()) {
        err = "missing helpful votes";
        return std::nullopt;
    }
    const int64_t yes = (*helpful)[0].get<int64_t>();
    const int64_t total = (*helpful)[1].get<int64_t>();
    if (yes < 0 || total < yes) {
        err = "invalid vote pair";
        return std::nullopt;
    }
    r.upvotes = yes;
    r.downvotes = total - yes;
    auto ts = j.find("unixReviewTime");
    if (ts == j.end() || !ts->is_number_integer()) {
        err = "missing unixReviewTime";
        return std::nullopt;
    }
    const int64_t secs = ts->get<int64_t>();
    r.timestamp_days = secs >= 0 ? secs / kSecondsPerDay : (secs - kSecondsPerDay + 1) / kSecondsPerDay;
    r.review_id = make_review_id(r.reviewer_id, r.product_id, r.timestamp_days);
    return r;
}

std::optional<Product> parse_product_record(std::string_view line, std::string& err) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        err = "not a JSON object";
        return std::nullopt;
    }
    Product p;
    if (!get_string(j, "asin", p.product_id) || p.product_id.empty()) {
        err = "missing asin";
        return std::nullopt;
    }
    std::set<std::string> cats;
    auto it = j.find("categories");
    if (it != j.end() && it->is_array()) {
        for (const auto& path : *it) {
            if (!path.is_array()) continue;
            for (const auto& name : path) {
                if (name.is_string() && !name.get_ref<const std::string&>().empty()) {
                    cats.insert(name.get<std::string>());
                }
            }
        }
    }
    p.categories.assign(cats.begin(), cats.end());
    return p;
}

std::string serialize_review(const Review& r) {
    json j;
    j["reviewerID"] = r.reviewer_id;
    j["reviewerName"] = r.user_name;
    j["asin"] = r.product_id;
    j["overall"] = r.rating;
    j["helpful"] = {r.upvotes, r.upvotes + r.downvotes};
    j["reviewText"] = r.text;
    j["unixReviewTime"] = r.timestamp_days * kSecondsPerDay;
    return j.dump();
}

std::string serialize_product(const Product& p) {
    json j;
    j["asin"] = p.product_id;
    json paths = json::array();
    for (const auto& c : p.categories) paths.push_back(json::array({c}));
    j["categories"] = paths;
    return j.dump();
}

int64_t helpfulness_score(const Review& r) {
    return r.upvotes - r.downvotes;
}

void CorpusStore::append_review(Review r) {
    const auto idx = static_cast<uint32_t>(reviews_.size());
    review_index_.emplace(r.review_id, idx);
    reviewer_index_[r.reviewer_id].push_back(idx);
    reviews_.push_back(std::move(r));
}

void CorpusStore::upsert_product(Product p) {
    auto it = product_index_.find(p.product_id);
    if (it != product_index_.end()) {
        products_[it->second] = std::move(p); // last record wins
        return;
    }
    product_index_.emplace(p.product_id, static_cast<uint32_t>(products_.size()));
    products_.push_back(std::move(p));
}

void CorpusStore::build_category_index() {
    category_index_.clear();
    for (uint32_t i = 0; i < reviews_.size(); ++i) {
        const Product* p = find_product(reviews_[i].product_id);
        if (!p) continue;
        for (const auto& c : p->categories) category_index_[c].push_back(i);
    }
}

const Review* CorpusStore::find_review(std::string_view review_id) const {
    auto it = review_index_.find(std::string(review_id));
    return it == review_index_.end() ? nullptr : &reviews_[it->second];
}

const Product* CorpusStore::find_product(std::string_view product_id) const {
    auto it = product_index_.find(std::string(product_id));
    return it == product_index_.end() ? nullptr : &products_[it->second];
}

std::span<const uint32_t> CorpusStore::reviews_of(std::string_view reviewer_id) const {
    auto it = reviewer_index_.find(std::string(reviewer_id));
    if (it == reviewer_index_.end()) return {};
    return it->second;
}

std::span<const uint32_t> CorpusStore::reviews_in_category(std::string_view category) const {
    auto it = category_index_.find(std::string(category));
    if (it == category_index_.end()) return {};
    return it->second;
}

std::vector<std::string> CorpusStore::reviewer_ids_sorted() const {
    std::vector<std::string> ids;
    ids.reserve(reviewer_index_.size());
    for (const auto& [id, _] : reviewer_index_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<std::string> CorpusStore::categories_sorted() const {
    std::vector<std::string> cats;
    cats.reserve(category_index_.size());
    for (const auto& [c, _] : category_index_) cats.push_back(c);
    std::sort(cats.begin(), cats.end());
    return cats;
}

std::string CorpusStore::canonical_user_name(std::string_view reviewer_id) const {
    std::map<std::string, int> freq;
    for (uint32_t idx : reviews_of(reviewer_id)) ++freq[reviews_[idx].user_name];
    std::string best;
    int best_n = -1;
    for (const auto& [name, n] : freq) {
        if (n > best_n) { // map iterates lexicographically, so ties keep the smaller name
            best = name;
            best_n = n;
        }
    }
    return best;
}

CorpusStats CorpusStore::stats() const {
    CorpusStats s;
    s.review_count = static_cast<int64_t>(reviews_.size());
    s.reviewer_count = static_cast<int64_t>(reviewer_index_.size());
    s.product_count = static_cast<int64_t>(products_.size());
    s.category_count = static_cast<int64_t>(category_index_.size());
    if (reviews_.empty()) return s;
    double words = 0, rating = 0, up = 0, down = 0;
    for (const auto& r : reviews_) {
        words += static_cast<double>(word_count(r.text));
        rating += r.rating;
        up += static_cast<double>(r.upvotes);
        down += static_cast<double>(r.downvotes);
    }
    const auto n = static_cast<double>(reviews_.size());
    s.mean_words_per_review = words / n;
    s.mean_rating = rating / n;
    s.mean_upvotes = up / n;
    s.mean_downvotes = down / n;
    return s;
}

void CorpusStore::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "reviews.jsonl", std::ios::binary);
        if (!out) throw DataError("cannot write store: " + (dir / "reviews.jsonl").string());
        for (const auto& r : reviews_) out << serialize_review(r) << '\n';
    }
    {
        std::ofstream out(dir / "products.jsonl", std::ios::binary);
        for (const auto& p : products_) out << serialize_product(p) << '\n';
    }
    json meta;
    meta["review_lines"] = counts_.review_lines;
    meta["reviews_admitted"] = counts_.reviews_admitted;
    meta["reviews_skipped"] = counts_.reviews_skipped;
    meta["reviews_malformed"] = counts_.reviews_malformed;
    meta["reviews_duplicate"] = counts_.reviews_duplicate;
    meta["product_lines"] = counts_.product_lines;
    meta["products_admitted"] = counts_.products_admitted;
    meta["products_skipped"] = counts_.products_skipped;
    meta["products_duplicate"] = counts_.products_duplicate;
    std::ofstream out(dir / "meta.json", std::ios::binary);
    out << meta.dump(2) << '\n';
}

CorpusStore CorpusStore::load(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "reviews.jsonl")) {
        throw DataError("store not found at " + dir.string() + "; run the ingest stage first");
    }
    CorpusStore store;
    std::string line, err;
    {
        LineReader in((dir / "products.jsonl").string());
        while (in.next(line)) {
            if (line.empty()) continue;
            auto p = parse_product_record(line, err);
            if (!p) throw DataError("corrupt store record in products.jsonl: " + err);
            store.upsert_product(std::move(*p));
        }
    }
    {
        LineReader in((dir / "reviews.jsonl").string());
        while (in.next(line)) {
            if (line.empty()) continue;
            auto r = parse_review_record(line, err);
            if (!r) throw DataError("corrupt store record in reviews.jsonl: " + err);
            store.append_review(std::move(*r));
        }
    }
    store.build_category_index();
    std::ifstream meta_in(dir / "meta.json");
    if (meta_in) {
        json meta = json::parse(meta_in, nullptr, false);
        if (!meta.is_discarded()) {
            IngestCounts c;
            c.review_lines = meta.value("review_lines", int64_t{0});
            c.reviews_admitted = meta.value("reviews_admitted", int64_t{0});
            c.reviews_skipped = meta.value("reviews_skipped", int64_t{0});
            c.reviews_malformed = meta.value("reviews_malformed", int64_t{0});
            c.reviews_duplicate = meta.value("reviews_duplicate", int64_t{0});
            c.product_lines = meta.value("product_lines", int64_t{0});
            c.products_admitted = meta.value("products_admitted", int64_t{0});
            c.products_skipped = meta.value("products_skipped", int64_t{0});
            c.products_duplicate = meta.value("products_duplicate", int64_t{0});
            store.counts_ = c;
        }
    }
    return store;
}

} // namespace revgender
