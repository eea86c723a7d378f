#include "adaloss/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "adaloss/errors.hpp"

namespace adaloss {
namespace {

void check_field(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") != std::string::npos) {
        throw ContractViolation("CSV field '" + cell + "' contains a separator or quote");
    }
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

} // namespace

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string format_count(std::size_t value) { return std::to_string(value); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    for (const auto& h : header_) {
        check_field(h);
    }
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
        throw ContractViolation("CSV row has " + std::to_string(cells.size()) +
                                " cells, header has " + std::to_string(header_.size()));
    }
    for (const auto& c : cells) {
        check_field(c);
    }
    rows_.push_back(std::move(cells));
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) {
        throw DataError("CSV has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header_.begin());
}

void write_csv(std::ostream& out, const CsvTable& table) {
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) {
                out << ',';
            }
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header());
    for (const auto& row : table.rows()) {
        emit(row);
    }
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_csv(out, table);
    if (!out) {
        throw DataError("short write to " + path.string());
    }
}

CsvTable read_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ": empty CSV");
    }
    auto strip_cr = [](std::string& s) {
        if (!s.empty() && s.back() == '\r') {
            s.pop_back();
        }
    };
    strip_cr(line);
    CsvTable table(split_line(line));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) {
            continue;
        }
        auto cells = split_line(line);
        if (cells.size() != table.header().size()) {
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header().size()) + " fields");
        }
        table.add_row(std::move(cells));
    }
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_csv(in, path.string());
}

} // namespace adaloss
