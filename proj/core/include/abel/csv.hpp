#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "abel/errors.hpp"

namespace abel {

struct Dataset {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
    std::string source;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    int column_index(const std::string& name) const;
};

// Parses a rectangular numeric CSV. Non-numeric cells raise
// ParseError(row, col) with 1-based data coordinates; ragged rows raise
// ParseError on the offending row. Requires at least 2 data rows.
Dataset load_csv(const std::string& path, bool header, char delimiter = ',');

Dataset parse_csv_text(const std::string& text, bool header, char delimiter,
                       const std::string& source);

} // namespace abel
