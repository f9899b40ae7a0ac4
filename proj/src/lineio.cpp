#include "lineio.hpp"

#include <zlib.h>

#include "errors.hpp"

namespace revgender {

struct LineReader::Impl {
    gzFile file = nullptr;
    std::string buf;
    size_t pos = 0;
    bool eof = false;

    bool fill() {
        if (eof) return false;
        char chunk[1 << 16];
        const int n = gzread(file, chunk, sizeof(chunk));
        if (n < 0) {
            int errnum = 0;
            const char* msg = gzerror(file, &errnum);
            throw DataError(std::string("read error: ") + (msg ? msg : "unknown"));
        }
        if (n == 0) {
            eof = true;
            return false;
        }
        buf.append(chunk, static_cast<size_t>(n));
        return true;
    }
};

LineReader::LineReader(const std::string& path) : impl_(std::make_unique<Impl>()) {
    impl_->file = gzopen(path.c_str(), "rb");
    if (!impl_->file) throw DataError("cannot open input file: " + path);
}

LineReader::~LineReader() {
    if (impl_ && impl_->file) gzclose(impl_->file);
}

bool LineReader::next(std::string& line) {
    auto& st = *impl_;
    while (true) {
        const size_t nl = st.buf.find('\n', st.pos);
        if (nl != std::string::npos) {
            line.assign(st.buf, st.pos, nl - st.pos);
            st.pos = nl + 1;
            if (st.pos > (1 << 20)) {
                st.buf.erase(0, st.pos);
                st.pos = 0;
            }
            if (!line.empty() && line.back() == '\r') line.pop_back();
            ++line_no_;
            return true;
        }
        if (!st.fill()) {
            if (st.pos < st.buf.size()) {
                line.assign(st.buf, st.pos, st.buf.size() - st.pos);
                st.pos = st.buf.size();
                if (!line.empty() && line.back() == '\r') line.pop_back();
                ++line_no_;
                return true;
            }
            return false;
        }
    }
}

bool StringLineSource::next(std::string& line) {
    if (pos_ >= text_.size()) return false;
    const size_t nl = text_.find('\n', pos_);
    if (nl == std::string::npos) {
        line.assign(text_, pos_, text_.size() - pos_);
        pos_ = text_.size();
    } else {
        line.assign(text_, pos_, nl - pos_);
        pos_ = nl + 1;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace revgender
