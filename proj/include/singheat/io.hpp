#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace singheat::io {

/// Shortest text with 17 significant digits, '.' decimal, locale independent.
std::string fmt(double v);

/// Minimal CSV writer: header once, then rows of already formatted cells.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header);

    CsvWriter& cell(double v);
    CsvWriter& cell(std::size_t v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::string_view s);
    void end_row();

private:
    std::ostream& os_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Writes text atomically enough for our purposes: temp file then rename.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace singheat::io
