#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace adaloss {

/// Real numbers in every CSV report use 6 significant digits ("%.6g").
std::string format_real(double value);
std::string format_count(std::size_t value);

/// Minimal CSV table: UTF-8, comma separated, header row first. Fields are
/// never quoted, so a field may not contain a comma, quote or newline.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);

    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    std::size_t column(const std::string& name) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

/// Throws DataError on a missing file or ragged rows.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::filesystem::path& path);

} // namespace adaloss
