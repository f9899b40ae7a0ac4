#pragma once

#include <functional>
#include <memory>
#include <string>

namespace revgender {

/// Reads newline-delimited text from a plain or gzip-compressed file
/// (zlib's gzopen sniffs the magic bytes, so compression is transparent).
class LineReader {
public:
    explicit LineReader(const std::string& path);
    ~LineReader();

    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    /// Next line without the trailing newline. Returns false at EOF.
    bool next(std::string& line);

    int64_t line_number() const { return line_no_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int64_t line_no_ = 0;
};

/// Feeds in-memory text through the same interface; used by tests and synth.
class StringLineSource {
public:
    explicit StringLineSource(std::string text) : text_(std::move(text)) {}
    bool next(std::string& line);

private:
    std::string text_;
    size_t pos_ = 0;
};

} // namespace revgender
