#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lmsim {

/// In-memory CSV table. UTF-8, comma separator, mandatory header row,
/// `.` decimal point. Fields may be double-quoted; quotes double to escape.
struct CsvTable {
    std::string source; // file name, for error messages
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index for a header name; throws ParseError when absent.
    std::size_t column(const std::string& name) const;

    /// Cell accessor with row bounds already established by the caller.
    const std::string& cell(std::size_t row, std::size_t col) const {
        return rows[row][col];
    }
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string source);

std::string csv_line(const std::vector<std::string>& fields);

} // namespace lmsim
