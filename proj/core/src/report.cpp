#include "abel/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace abel {

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

nlohmann::json json_number(double v) {
    if (std::isinf(v)) return nlohmann::json(v > 0 ? "inf" : "-inf");
    if (std::isnan(v)) return nlohmann::json("nan");
    return nlohmann::json(v);
}

double number_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw ConfigError("unexpected tagged number '" + s + "'");
    }
    return j.get<double>();
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["results"] = results;
    j["seed"] = seed;
    j["wall_time_s"] = wall_time_s;
    return j;
}

RunReport RunReport::from_json(const nlohmann::json& j) {
    RunReport r;
    r.command = j.at("command").get<std::string>();
    r.config = j.at("config");
    r.results = j.at("results");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    return r;
}

std::string coverage_csv(const CoverageReport& report) {
    std::ostringstream os;
    os << "rho,d,method,M,level,coverage,se\n";
    for (const CoverageCell& cell : report.cells) {
        os << format_number(report.rho) << ',' << report.d << ',' << cell.method << ','
           << cell.block_label << ',' << format_number(cell.level) << ','
           << format_number(cell.coverage) << ',' << format_number(cell.se) << '\n';
    }
    return os.str();
}

nlohmann::json coverage_json(const CoverageReport& report) {
    nlohmann::json j;
    j["n"] = report.n;
    j["d"] = report.d;
    j["rho"] = report.rho;
    j["seed"] = report.seed;
    j["replications"] = report.replications;
    nlohmann::json cells = nlohmann::json::array();
    for (const CoverageCell& cell : report.cells) {
        nlohmann::json c;
        c["method"] = cell.method;
        c["M"] = cell.block_label;
        c["level"] = cell.level;
        c["coverage"] = cell.coverage;
        c["se"] = cell.se;
        c["replications"] = cell.replications;
        c["failures"] = cell.failures;
        c["infinite"] = cell.infinite;
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("short write to '" + path + "'");
}

} // namespace abel
