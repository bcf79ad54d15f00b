// abel: blockwise empirical-likelihood inference for weakly dependent data.
//
// Subcommands:
//   simulate  coverage study driven by a config file
//   ci        profile confidence interval for one model parameter
//   test      Bonferroni-corrected subset hypothesis tests
//
// Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "abel/commands.hpp"
#include "abel/report.hpp"

namespace {

void print_ci(const abel::RunReport& report) {
    const auto& r = report.results;
    std::cout << "component: " << report.config.at("component").get<std::string>()
              << "\n"
              << "interval:  [" << abel::format_number(r.at("lo").get<double>()) << ", "
              << abel::format_number(r.at("hi").get<double>()) << "]\n"
              << "point:     " << abel::format_number(r.at("point").get<double>())
              << "\n"
              << "level:     " << r.at("level").get<double>() << "  (threshold "
              << abel::format_number(r.at("quantile").get<double>()) << ", a = "
              << abel::format_number(r.at("resolved_a").get<double>()) << ")\n";
}

void print_tests(const abel::RunReport& report) {
    std::printf("%-16s %12s %4s %10s %10s %7s %12s\n", "component", "statistic", "df",
                "p_value", "threshold", "reject", "bel");
    for (const auto& row : report.results.at("tests")) {
        const double stat = abel::number_from_json(row.at("statistic"));
        const double bel = abel::number_from_json(row.at("bel_statistic"));
        std::printf("%-16s %12s %4d %10.4g %10.4g %7s %12s\n",
                    row.at("component").get<std::string>().c_str(),
                    abel::format_number(stat).substr(0, 12).c_str(),
                    row.at("df").get<int>(), row.at("p_value").get<double>(),
                    row.at("threshold").get<double>(),
                    row.at("reject").get<bool>() ? "yes" : "no",
                    abel::format_number(bel).substr(0, 12).c_str());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adjusted blockwise empirical likelihood inference"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage study");
    std::string sim_config, sim_out = "sim_out", sim_format = "both";
    std::uint64_t sim_seed = 0;
    unsigned sim_threads = 0;
    bool sim_seed_set = false;
    sim->add_option("--config", sim_config, "config file")->required();
    sim->add_option("--out-dir", sim_out, "output directory");
    sim->add_option("--format", sim_format, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    sim->add_option("--seed", sim_seed, "override the config seed")
        ->each([&](const std::string&) { sim_seed_set = true; });
    sim->add_option("--threads", sim_threads, "worker threads (0: auto)");

    auto add_analysis_options = [](CLI::App* cmd, abel::AnalysisOptions& o) {
        cmd->add_option("--data", o.data_path, "CSV data file")->required();
        cmd->add_flag("!--no-header", o.header, "data file has no header row");
        cmd->add_option("--model", o.model, "mean|linreg|linreg_intercept");
        cmd->add_option("--blocks", o.blocking, "block length or 'pro'");
        cmd->add_option("--gap", o.gap, "gap between block starts (default: M)");
        cmd->add_option("--adjust", o.adjust, "bel|abel_log|abel_hp|abel_<a>");
        cmd->add_option("--bootstrap-reps", o.bootstrap_reps,
                        "bootstrap replications for abel_hp");
        cmd->add_option("--bootstrap-block", o.bootstrap_block,
                        "bootstrap block length (0: analysis block length)");
        cmd->add_option("--seed", o.seed, "seed for bootstrap substreams");
        cmd->add_option("--out-dir", o.out_dir, "output directory");
        cmd->add_option("--format", o.format, "csv|json|both")
            ->check(CLI::IsMember({"csv", "json", "both"}));
    };

    // ci
    auto* ci = app.add_subcommand("ci", "profile confidence interval");
    abel::CiOptions ci_options;
    add_analysis_options(ci, ci_options);
    ci->add_option("--component", ci_options.component,
                   "parameter name or index")
        ->required();
    ci->add_option("--level", ci_options.level, "confidence level");

    // test
    auto* test = app.add_subcommand("test", "subset hypothesis tests");
    abel::TestOptions test_options;
    add_analysis_options(test, test_options);
    test->add_option("--components", test_options.components,
                     "parameters to test (default: all)");
    test->add_option("--nulls", test_options.null_values,
                     "null values (default: 0 each)");
    test->add_option("--level", test_options.familywise_level,
                     "familywise confidence level");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const abel::RunReport report = abel::run_simulate(
                sim_config, sim_out, sim_format,
                sim_seed_set ? std::optional<std::uint64_t>(sim_seed) : std::nullopt,
                sim_threads);
            std::cout << "coverage cells: " << report.results.at("cells").size()
                      << "\nwritten to " << sim_out << "/coverage.{csv,json}\n";
        } else if (ci->parsed()) {
            print_ci(abel::run_ci(ci_options));
        } else if (test->parsed()) {
            print_tests(abel::run_test(test_options));
        }
    } catch (const abel::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const abel::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const abel::IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const abel::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
