#pragma once

#include <string>
#include <vector>

namespace selrisk {

/// Comma-separated table: header row required, UTF-8, '.' decimal point.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column; throws std::runtime_error when absent.
    std::size_t column(const std::string& name) const;
};

/// Parse a CSV file.  Malformed rows (wrong field count) raise
/// std::runtime_error naming the 1-based file row.  An empty file or a
/// file with a header but no data rows is an error.
CsvTable read_csv(const std::string& path);

/// Field -> double with the 1-based file row in the error message.
double csv_double(const CsvTable& table, std::size_t row, std::size_t col);

/// Serialize a double with 17 significant digits (round-trips exactly).
std::string format_double(double v);

/// Write lines to `path` atomically (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& content);

/// Write a CSV table atomically.
void write_csv_atomic(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

}  // namespace selrisk
