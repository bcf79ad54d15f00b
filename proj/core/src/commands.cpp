#include "abel/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "abel/config.hpp"
#include "abel/csv.hpp"
#include "abel/inference.hpp"

namespace abel {

namespace {

namespace fs = std::filesystem;

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

void write_outputs(const RunReport& report, const std::string& out_dir,
                   const std::string& format, const std::string& csv_name,
                   const std::string& csv_content) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    if (format == "json" || format == "both")
        write_text_file((fs::path(out_dir) / "report.json").string(),
                        report.to_json().dump(2) + "\n");
    if (format == "csv" || format == "both")
        write_text_file((fs::path(out_dir) / csv_name).string(), csv_content);
}

BlockScheme scheme_from(const AnalysisOptions& options, std::size_t n) {
    if (options.blocking == "pro" || options.blocking == "progressive")
        return progressive_blocks(n);
    std::size_t M = 0;
    try {
        M = static_cast<std::size_t>(std::stoul(options.blocking));
    } catch (const std::exception&) {
        throw ConfigError("blocking spec must be 'pro' or a block length, got '" +
                          options.blocking + "'");
    }
    const std::size_t L = options.gap == 0 ? M : options.gap;
    return make_blocks(n, M, L);
}

nlohmann::json scheme_json(const BlockScheme& scheme) {
    nlohmann::json j;
    switch (scheme.kind) {
        case BlockKind::overlapping: j["kind"] = "overlapping"; break;
        case BlockKind::nonoverlapping: j["kind"] = "nonoverlapping"; break;
        case BlockKind::progressive: j["kind"] = "progressive"; break;
    }
    j["n"] = scheme.n;
    j["M"] = scheme.M;
    j["L"] = scheme.L;
    j["Q"] = scheme.Q;
    j["scale"] = scheme.scale;
    return j;
}

struct ModelBundle {
    EstimatingFunction ef;
    std::vector<std::string> parameter_names;
};

ModelBundle build_model(const std::string& model, const Dataset& data) {
    ModelBundle bundle;
    if (model == "mean") {
        bundle.ef = mean_ef(static_cast<int>(data.cols()));
        bundle.parameter_names = data.columns;
    } else if (model == "linreg" || model == "linreg_intercept") {
        if (data.cols() < 2)
            throw ConfigError("regression model needs a response and at least one "
                              "covariate column");
        const bool intercept = model == "linreg_intercept";
        bundle.ef = linreg_ef(static_cast<int>(data.cols()) - 1, intercept);
        if (intercept) bundle.parameter_names.push_back("intercept");
        for (std::size_t c = 1; c < data.columns.size(); ++c)
            bundle.parameter_names.push_back(data.columns[c]);
    } else {
        throw ConfigError("unknown model '" + model +
                          "' (expected mean, linreg or linreg_intercept)");
    }
    return bundle;
}

int resolve_component(const std::string& token, const ModelBundle& bundle) {
    for (std::size_t j = 0; j < bundle.parameter_names.size(); ++j)
        if (bundle.parameter_names[j] == token) return static_cast<int>(j);
    try {
        const int idx = std::stoi(token);
        if (idx >= 0 && idx < bundle.ef.p) return idx;
    } catch (const std::exception&) {
    }
    throw ConfigError("component '" + token + "' is neither a parameter name nor a "
                      "valid index");
}

AdjustmentSpec adjustment_from(const AnalysisOptions& options) {
    MethodSpec method = parse_method(options.adjust);
    if (method.adjustment.rule == AdjustmentSpec::Rule::high_precision) {
        method.adjustment.bootstrap.replications = options.bootstrap_reps;
        method.adjustment.bootstrap.block_length = options.bootstrap_block;
        method.adjustment.bootstrap.seed = options.seed;
    }
    return method.adjustment;
}

nlohmann::json adjustment_json(const AdjustmentSpec& adj) {
    nlohmann::json j;
    j["rule"] = adj.label();
    if (adj.resolved_a) j["resolved_a"] = *adj.resolved_a;
    if (adj.rule == AdjustmentSpec::Rule::high_precision) {
        j["bootstrap"] = {{"replications", adj.bootstrap.replications},
                          {"block_length", adj.bootstrap.block_length},
                          {"seed", adj.bootstrap.seed}};
    }
    return j;
}

} // namespace

RunReport run_simulate(const std::string& config_path, const std::string& out_dir,
                       const std::string& format,
                       std::optional<std::uint64_t> seed_override,
                       unsigned threads_override) {
    const auto start = std::chrono::steady_clock::now();

    const ConfigMap map = parse_config_file(config_path);
    SimConfig cfg = sim_config_from(map);
    if (seed_override) cfg.seed = *seed_override;
    if (threads_override) cfg.threads = threads_override;

    const CoverageReport coverage = coverage_experiment(cfg);

    RunReport report;
    report.command = "simulate";
    report.seed = cfg.seed;
    report.config = {{"config_path", config_path},
                     {"n", cfg.n},
                     {"d", cfg.d},
                     {"rho", cfg.rho},
                     {"replications", cfg.replications},
                     {"seed", cfg.seed},
                     {"gap", cfg.gap},
                     {"levels", cfg.levels}};
    nlohmann::json methods = nlohmann::json::array();
    for (const MethodSpec& m : cfg.methods) methods.push_back(m.label);
    report.config["methods"] = std::move(methods);
    nlohmann::json blocks = nlohmann::json::array();
    for (const BlockEntry& b : cfg.block_lengths) blocks.push_back(b.label());
    report.config["block_lengths"] = std::move(blocks);
    report.results = coverage_json(coverage);
    report.wall_time_s = elapsed_seconds(start);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        if (format == "csv" || format == "both")
            write_text_file((fs::path(out_dir) / "coverage.csv").string(),
                            coverage_csv(coverage));
        if (format == "json" || format == "both")
            write_text_file((fs::path(out_dir) / "coverage.json").string(),
                            coverage_json(coverage).dump(2) + "\n");
        write_text_file((fs::path(out_dir) / "report.json").string(),
                        report.to_json().dump(2) + "\n");
    }
    return report;
}

RunReport run_test(const TestOptions& options) {
    const auto start = std::chrono::steady_clock::now();

    const Dataset data = load_csv(options.data_path, options.header, options.delimiter);
    const ModelBundle bundle = build_model(options.model, data);
    const BlockScheme scheme =
        scheme_from(options, static_cast<std::size_t>(data.rows()));

    std::map<int, double> nulls;
    if (options.components.empty()) {
        for (int j = 0; j < bundle.ef.p; ++j) nulls[j] = 0.0;
    } else {
        for (std::size_t i = 0; i < options.components.size(); ++i) {
            const int idx = resolve_component(options.components[i], bundle);
            nulls[idx] = i < options.null_values.size() ? options.null_values[i] : 0.0;
        }
    }

    AdjustmentSpec adj = adjustment_from(options);
    BiasCorrectionInfo bc;
    if (!adj.is_bel()) {
        const Eigen::VectorXd ref = bundle.ef.initial_guess(data.values);
        adj = resolve_adjustment(adj, bundle.ef.evaluate_all(data.values, ref), scheme,
                                 &bc);
    }

    const std::vector<TestResult> tests = bonferroni_tests(
        data.values, bundle.ef, nulls, options.familywise_level, scheme, adj);

    RunReport report;
    report.command = "test";
    report.seed = options.seed;
    report.config = {{"data", options.data_path},
                     {"model", options.model},
                     {"familywise_level", options.familywise_level},
                     {"blocking", scheme_json(scheme)},
                     {"adjustment", adjustment_json(adj)},
                     {"seed", options.seed}};

    std::ostringstream csv;
    csv << "component,null,statistic,df,p_value,threshold,reject,bel_statistic\n";
    nlohmann::json rows = nlohmann::json::array();
    std::size_t i = 0;
    for (const auto& [idx, value] : nulls) {
        const TestResult& t = tests[i++];
        const std::string name = bundle.parameter_names[static_cast<std::size_t>(idx)];
        const bool reject = t.reject_at.begin()->second;
        nlohmann::json row;
        row["component"] = name;
        row["index"] = idx;
        row["null"] = value;
        row["statistic"] = json_number(t.statistic);
        row["df"] = t.df;
        row["p_value"] = t.p_value;
        row["threshold"] = t.threshold;
        row["reject"] = reject;
        row["bel_statistic"] = json_number(t.bel_statistic);
        row["mbele"] = std::vector<double>(t.mbele.data(), t.mbele.data() + t.mbele.size());
        row["mbele_adjusted"] = t.mbele_adjusted;
        rows.push_back(std::move(row));
        csv << name << ',' << format_number(value) << ',' << format_number(t.statistic)
            << ',' << t.df << ',' << format_number(t.p_value) << ','
            << format_number(t.threshold) << ',' << (reject ? 1 : 0) << ','
            << format_number(t.bel_statistic) << '\n';
    }
    report.results = {{"tests", std::move(rows)}};
    if (!adj.is_bel() && adj.rule == AdjustmentSpec::Rule::high_precision) {
        report.results["tuning"] = {{"a_plugin", bc.a_plugin},
                                    {"bias", bc.bias},
                                    {"se", bc.se},
                                    {"corrected", bc.corrected},
                                    {"bootstrap_failures", bc.failures}};
    }
    report.wall_time_s = elapsed_seconds(start);
    write_outputs(report, options.out_dir, options.format, "results.csv", csv.str());
    return report;
}

RunReport run_ci(const CiOptions& options) {
    const auto start = std::chrono::steady_clock::now();

    const Dataset data = load_csv(options.data_path, options.header, options.delimiter);
    const ModelBundle bundle = build_model(options.model, data);
    const BlockScheme scheme =
        scheme_from(options, static_cast<std::size_t>(data.rows()));
    const int component = resolve_component(options.component, bundle);

    AdjustmentSpec adj = adjustment_from(options);
    const ConfidenceInterval ci = confidence_interval(
        data.values, bundle.ef, component, options.level, scheme, adj);

    RunReport report;
    report.command = "ci";
    report.seed = options.seed;
    AdjustmentSpec resolved = adj;
    resolved.resolved_a = ci.resolved_a;
    report.config = {{"data", options.data_path},
                     {"model", options.model},
                     {"component", bundle.parameter_names[static_cast<std::size_t>(component)]},
                     {"level", options.level},
                     {"blocking", scheme_json(scheme)},
                     {"adjustment", adjustment_json(resolved)},
                     {"seed", options.seed}};
    report.results = {{"lo", ci.lo},
                      {"point", ci.point},
                      {"hi", ci.hi},
                      {"level", ci.level},
                      {"quantile", ci.quantile},
                      {"resolved_a", ci.resolved_a}};
    report.wall_time_s = elapsed_seconds(start);

    std::ostringstream csv;
    csv << "component,lo,point,hi,level,quantile,resolved_a\n";
    csv << bundle.parameter_names[static_cast<std::size_t>(component)] << ','
        << format_number(ci.lo) << ',' << format_number(ci.point) << ','
        << format_number(ci.hi) << ',' << format_number(ci.level) << ','
        << format_number(ci.quantile) << ',' << format_number(ci.resolved_a) << '\n';
    write_outputs(report, options.out_dir, options.format, "results.csv", csv.str());
    return report;
}

} // namespace abel
