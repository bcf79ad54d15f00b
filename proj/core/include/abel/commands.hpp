#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abel/report.hpp"

namespace abel {

// Shared CLI options for the data-analysis commands.
struct AnalysisOptions {
    std::string data_path;
    bool header = true;
    char delimiter = ',';
    std::string model = "linreg"; // mean | linreg | linreg_intercept
    std::string blocking = "pro"; // "pro" or a block length
    std::size_t gap = 0;          // 0: non-overlapping (L = M)
    std::string adjust = "abel_log"; // bel | abel_log | abel_hp | abel_<a>
    std::size_t bootstrap_reps = 100;
    std::size_t bootstrap_block = 0;
    std::uint64_t seed = 0;
    std::string out_dir;          // empty: no files written
    std::string format = "both";  // csv | json | both
};

struct TestOptions : AnalysisOptions {
    // Components to test, by parameter index or column name; empty means
    // every parameter. Null values default to 0.
    std::vector<std::string> components;
    std::vector<double> null_values;
    double familywise_level = 0.95;
};

struct CiOptions : AnalysisOptions {
    std::string component; // parameter index or column name
    double level = 0.95;
};

// `simulate` command: runs the coverage experiment described by a config
// file and writes coverage.csv, coverage.json and report.json under
// out_dir (when set).
RunReport run_simulate(const std::string& config_path, const std::string& out_dir,
                       const std::string& format,
                       std::optional<std::uint64_t> seed_override = std::nullopt,
                       unsigned threads_override = 0);

// `test` command: Bonferroni-corrected subset tests for the selected
// coefficients; writes results.csv and report.json under out_dir.
RunReport run_test(const TestOptions& options);

// `ci` command: profile confidence interval for one component; writes
// results.csv and report.json under out_dir.
RunReport run_ci(const CiOptions& options);

} // namespace abel
