#include "csvio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "errors.hpp"
#include "lineio.hpp"

namespace revgender {

namespace {

bool needs_quoting(std::string_view s) {
    return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

void write_quoted(std::ofstream& out, std::string_view s) {
    if (!needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    // Shortest representation that parses back to the same double.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open output file: " + path);
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        write_quoted(out_, header[i]);
    }
    out_ << '\n';
}

void CsvWriter::sep() {
    if (row_open_) out_ << ',';
    row_open_ = true;
}

CsvWriter& CsvWriter::field(std::string_view s) {
    sep();
    write_quoted(out_, s);
    return *this;
}

CsvWriter& CsvWriter::field(int64_t v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::field(uint64_t v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::field(double v) {
    sep();
    out_ << format_double(v);
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_open_ = false;
}

void CsvWriter::close() {
    out_.flush();
    out_.close();
    if (out_.fail()) throw DataError("failed to write CSV output");
}

std::vector<std::string> csv_split(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
        ++i;
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::vector<std::vector<std::string>> csv_read(const std::string& path,
                                               std::vector<std::string>* header) {
    LineReader reader(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (first) {
            if (header) *header = csv_split(line);
            first = false;
            continue;
        }
        if (line.empty()) continue;
        rows.push_back(csv_split(line));
    }
    if (first) throw DataError("empty CSV file: " + path);
    return rows;
}

} // namespace revgender
