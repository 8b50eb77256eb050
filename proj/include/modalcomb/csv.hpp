#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "modalcomb/errors.hpp"

namespace modalcomb {

/// Shortest representation that round-trips a double exactly (17 significant
/// digits); empty string for NaN so missing values become empty cells.
inline std::string csv_num(double v) {
    if (std::isnan(v)) return {};
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        return -1;
    }
};

/// Minimal CSV: comma separated, no quoting, empty cell = missing. CRLF and
/// trailing blank lines tolerated.
inline CsvTable read_csv(std::istream& is, const std::string& origin) {
    CsvTable t;
    std::string line;
    int lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        out.push_back(cur);
        return out;
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else {
            if (cells.size() != t.header.size())
                throw DataError(origin + ": row " + std::to_string(lineno) + " has " +
                                std::to_string(cells.size()) + " cells, expected " +
                                std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw DataError(origin + ": empty file");
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    return read_csv(f, path);
}

inline double parse_cell(const std::string& cell, const std::string& origin, int row,
                         const std::string& colname) {
    if (cell.empty()) return std::nan("");
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != cell.size())
        throw DataError(origin + ": row " + std::to_string(row) + " column " + colname +
                        ": not a number: '" + cell + "'");
    return v;
}

inline void write_csv(std::ostream& os, const CsvTable& t) {
    for (std::size_t j = 0; j < t.header.size(); ++j)
        os << t.header[j] << (j + 1 < t.header.size() ? "," : "\n");
    for (const auto& r : t.rows)
        for (std::size_t j = 0; j < r.size(); ++j) os << r[j] << (j + 1 < r.size() ? "," : "\n");
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    write_csv(f, t);
}

}  // namespace modalcomb
