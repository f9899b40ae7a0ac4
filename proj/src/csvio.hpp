#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace revgender {

/// RFC 4180 style CSV writer. Numeric formatting is deterministic; doubles
/// use round-trip precision so downstream stages reload exact values.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    CsvWriter& field(std::string_view s);
    CsvWriter& field(int64_t v);
    CsvWriter& field(uint64_t v);
    CsvWriter& field(int v) { return field(static_cast<int64_t>(v)); }
    CsvWriter& field(size_t v) { return field(static_cast<uint64_t>(v)); }
    CsvWriter& field(double v);
    CsvWriter& field(bool v) { return field(std::string_view(v ? "true" : "false")); }
    void end_row();

    void close();

private:
    void sep();
    std::ofstream out_;
    bool row_open_ = false;
};

std::string format_double(double v);

/// Splits one CSV line honoring double-quote escaping.
std::vector<std::string> csv_split(std::string_view line);

/// Loads a whole CSV file; `header` receives the first row.
std::vector<std::vector<std::string>> csv_read(const std::string& path,
                                               std::vector<std::string>* header);

} // namespace revgender
