#include "singheat/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace singheat::io {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header)
    : os_(os), columns_(header.size()) {
    bool first = true;
    for (auto h : header) {
        if (!first) os_ << ',';
        os_ << h;
        first = false;
    }
    os_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(fmt(v))); }

CsvWriter& CsvWriter::cell(std::size_t v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::string_view s) {
    if (filled_ == columns_) throw std::logic_error("csv row has too many cells");
    if (filled_ > 0) os_ << ',';
    os_ << s;
    ++filled_;
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) throw std::logic_error("csv row is short");
    os_ << '\n';
    filled_ = 0;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace singheat::io
