#pragma once

#include <map>
#include <string>
#include <vector>

#include "abel/errors.hpp"
#include "abel/simulate.hpp"

namespace abel {

// Flat key/value view of the config text format:
//   key = value            top-level entry
//   [section]              keys below become "section.key"
//   # comment              '#' starts a comment anywhere on a line
// Values are scalars or comma-separated lists.
struct ConfigMap {
    std::map<std::string, std::string> entries;
    std::string source;

    bool has(const std::string& key) const { return entries.count(key) > 0; }
    const std::string& raw(const std::string& key) const;

    double get_double(const std::string& key) const;
    std::size_t get_size(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;
};

ConfigMap parse_config_text(const std::string& text, const std::string& source);
ConfigMap parse_config_file(const std::string& path);

// Method label -> adjustment rule: "bel", "abel_log", "abel_hp",
// "abel_<a>" with a > 0 fixed.
MethodSpec parse_method(const std::string& label);

// Simulation configuration from the documented key set
//   n, d, rho, methods, block_lengths, levels, replications, seed
// with optional keys gap and [bootstrap] replications / block_length /
// threads. Any other key raises ConfigError naming it.
SimConfig sim_config_from(const ConfigMap& map);

} // namespace abel
