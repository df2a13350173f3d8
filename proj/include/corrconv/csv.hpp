#pragma once

#include <cstdio>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace corrconv {

/// Doubles formatted with 17 significant digits round-trip exactly, which is
/// what keeps rerun CSVs byte-identical.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("csv: missing column '" + name + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

/// Parses a rectangular CSV with a header line. Errors name the 1-based data
/// row that broke the shape.
inline CsvTable parse_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw std::runtime_error("csv: empty input, no header");
    table.header = split_csv_line(line);
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row_number;
        auto cells = split_csv_line(line);
        if (cells.size() != table.header.size())
            throw std::runtime_error("csv: row " + std::to_string(row_number) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(table.header.size()));
        table.rows.push_back(std::move(cells));
    }
    return table;
}

inline double csv_number(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& cell = table.rows[row][col];
    try {
        return std::stod(cell);
    } catch (const std::exception&) {
        throw std::runtime_error("csv: row " + std::to_string(row + 1) + " column " +
                                 std::to_string(col) + " is not numeric: '" + cell + "'");
    }
}

} // namespace corrconv
