#include "abel/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace abel {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, delim)) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) cells.push_back("");
    return cells;
}

} // namespace

int Dataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw ConfigError("no column named '" + name + "' in " + source);
}

Dataset parse_csv_text(const std::string& text, bool header, char delimiter,
                       const std::string& source) {
    std::vector<std::string> lines;
    {
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!trim(line).empty()) lines.push_back(line);
        }
    }
    if (lines.empty()) throw ParseError(1, 1, source + ": empty input");

    Dataset ds;
    ds.source = source;
    std::size_t first_data = 0;
    if (header) {
        ds.columns = split_line(lines[0], delimiter);
        first_data = 1;
    }

    const std::size_t n = lines.size() - first_data;
    if (n < 2)
        throw ParseError(1, 1, source + ": need at least 2 data rows, got " +
                                   std::to_string(n));

    std::size_t n_cols = 0;
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto cells = split_line(lines[first_data + r], delimiter);
        if (r == 0) {
            n_cols = cells.size();
        } else if (cells.size() != n_cols) {
            throw ParseError(r + 1, cells.size(),
                             source + ": row " + std::to_string(r + 1) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(n_cols));
        }
        std::vector<double> row(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) {
            const std::string& cell = cells[c];
            double value = 0.0;
            const auto* begin = cell.data();
            const auto* end = begin + cell.size();
            const auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc() || ptr != end)
                throw ParseError(r + 1, c + 1,
                                 source + ": non-numeric cell '" + cell + "' at row " +
                                     std::to_string(r + 1) + ", column " +
                                     std::to_string(c + 1));
            row[c] = value;
        }
        rows.push_back(std::move(row));
    }

    if (ds.columns.empty())
        for (std::size_t c = 0; c < n_cols; ++c)
            ds.columns.push_back("c" + std::to_string(c));
    if (ds.columns.size() != n_cols)
        throw ParseError(1, ds.columns.size(), source + ": header/data width mismatch");

    ds.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n_cols; ++c)
            ds.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
    return ds;
}

Dataset load_csv(const std::string& path, bool header, char delimiter) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv_text(buffer.str(), header, delimiter, path);
}

} // namespace abel
