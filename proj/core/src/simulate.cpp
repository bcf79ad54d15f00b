#include "abel/simulate.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "abel/stats.hpp"

namespace abel {

namespace {

BlockScheme scheme_for(const BlockEntry& entry, std::size_t n, std::size_t gap) {
    if (entry.progressive) return progressive_blocks(n);
    const std::size_t L = gap == 0 ? 1 : std::min(gap, entry.M);
    return make_blocks(n, entry.M, L);
}

} // namespace

CoverageReport coverage_experiment_with(
    const SimConfig& config,
    const std::vector<std::pair<std::string, StatisticFn>>& statistics) {
    if (config.replications < 1) throw ConfigError("replications must be >= 1");
    if (std::abs(config.rho) >= 1.0) throw ConfigError("|rho| must be below 1");
    for (double level : config.levels)
        if (!(level > 0.0 && level < 1.0))
            throw ConfigError("levels must lie in (0, 1)");

    struct Combo {
        std::size_t stat_idx;
        BlockScheme scheme;
        std::string block_label;
    };
    std::vector<Combo> combos;
    for (std::size_t s = 0; s < statistics.size(); ++s)
        for (const BlockEntry& entry : config.block_lengths)
            combos.push_back({s, scheme_for(entry, config.n, config.gap), entry.label()});

    // Per-replication statistic values, laid out rep-major so aggregation
    // is independent of the execution order of the worker threads.
    const std::size_t reps = config.replications;
    std::vector<double> stat_values(reps * combos.size(),
                                    std::numeric_limits<double>::quiet_NaN());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= reps) break;
            Philox rng(config.seed, rep);
            const Eigen::MatrixXd data = ar1_simulate(config.n, config.d, config.rho, rng);
            for (std::size_t c = 0; c < combos.size(); ++c) {
                double value = std::numeric_limits<double>::quiet_NaN();
                try {
                    value = statistics[combos[c].stat_idx].second(data, combos[c].scheme, rep);
                } catch (const Error&) {
                    // NaN marks a failed replication for this combo.
                }
                stat_values[rep * combos.size() + c] = value;
            }
        }
    };

    unsigned n_threads = config.threads == 0 ? std::thread::hardware_concurrency()
                                             : config.threads;
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(reps));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    CoverageReport report;
    report.n = config.n;
    report.d = config.d;
    report.rho = config.rho;
    report.seed = config.seed;
    report.replications = reps;

    std::vector<double> quantiles;
    quantiles.reserve(config.levels.size());
    for (double level : config.levels)
        quantiles.push_back(chi2_quantile(static_cast<int>(config.d), level));

    for (std::size_t c = 0; c < combos.size(); ++c) {
        std::size_t failures = 0;
        std::size_t infinite = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const double v = stat_values[rep * combos.size() + c];
            if (std::isnan(v)) ++failures;
            else if (std::isinf(v)) ++infinite;
        }
        const std::size_t used = reps - failures;
        for (std::size_t li = 0; li < config.levels.size(); ++li) {
            std::size_t covered = 0;
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const double v = stat_values[rep * combos.size() + c];
                if (!std::isnan(v) && v < quantiles[li]) ++covered;
            }
            CoverageCell cell;
            cell.method = statistics[combos[c].stat_idx].first;
            cell.block_label = combos[c].block_label;
            cell.level = config.levels[li];
            cell.replications = used;
            cell.failures = failures;
            cell.infinite = infinite;
            cell.coverage = used == 0 ? 0.0
                                      : static_cast<double>(covered) /
                                            static_cast<double>(used);
            cell.se = used == 0 ? 0.0
                                : std::sqrt(cell.coverage * (1.0 - cell.coverage) /
                                            static_cast<double>(used));
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

CoverageReport coverage_experiment(const SimConfig& config) {
    std::vector<std::pair<std::string, StatisticFn>> statistics;
    statistics.reserve(config.methods.size());
    for (const MethodSpec& method : config.methods) {
        AdjustmentSpec adj = method.adjustment;
        statistics.emplace_back(
            method.label,
            [adj, &config](const Eigen::MatrixXd& data, const BlockScheme& scheme,
                           std::size_t rep) {
                // g at the true mean (zero) is the data itself.
                if (adj.is_bel()) return bel_statistic(data, scheme);

                AdjustmentSpec local = adj;
                if (adj.rule == AdjustmentSpec::Rule::high_precision) {
                    // Moment estimation follows the non-overlapping layout
                    // at the same block length; bootstrap seeds are
                    // derived per replication.
                    const BlockScheme resolve_scheme =
                        scheme.kind == BlockKind::overlapping
                            ? make_blocks(scheme.n, scheme.M, scheme.M)
                            : scheme;
                    local.bootstrap.seed = mix_seed(config.seed, rep);
                    local = resolve_adjustment(local, data, resolve_scheme);
                }
                return abel_statistic(data, scheme, local);
            });
    }
    return coverage_experiment_with(config, statistics);
}

} // namespace abel
