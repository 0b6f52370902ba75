#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dyson::io {

/// Lower-case hex SHA-1 of raw bytes.
std::string sha1_hex(std::string_view bytes);

/// Git object id of a blob: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_sha1(std::string_view content);

/// "%.17g"; non-finite values render as nan, inf, -inf.
std::string format_double(double x);

/// One RFC 4180 field, quoted only when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

/// Table with a header row and CRLF line breaks.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    void add_numeric_row(const std::vector<double>& values);

    std::size_t rows() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Write `content` to `path`, creating parent directories; returns its git blob hash.
std::string write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace dyson::io
