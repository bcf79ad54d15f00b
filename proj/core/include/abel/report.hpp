#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

#include "abel/simulate.hpp"

namespace abel {

// Machine-readable record of one CLI run. The config echo carries every
// resolved input (paths, seed, block layout, tuning parameter) needed to
// reproduce the run; numbers serialize losslessly and +inf statistics
// appear as the tagged string "inf".
struct RunReport {
    std::string command;
    nlohmann::json config;
    nlohmann::json results;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;

    nlohmann::json to_json() const;
    static RunReport from_json(const nlohmann::json& j);

    bool operator==(const RunReport& other) const {
        return command == other.command && config == other.config &&
               results == other.results && seed == other.seed;
    }
};

// Lossless text form of a double; infinities map to "inf" / "-inf".
std::string format_number(double v);

// JSON value for a statistic: a plain number, or the tagged "inf" string
// for an infinite one.
nlohmann::json json_number(double v);

// Inverse of json_number.
double number_from_json(const nlohmann::json& j);

// Table-shaped CSV of a coverage report with columns
// rho,d,method,M,level,coverage,se (LF line endings, '.' decimal point).
std::string coverage_csv(const CoverageReport& report);

nlohmann::json coverage_json(const CoverageReport& report);

void write_text_file(const std::string& path, const std::string& content);

} // namespace abel
