#include "abel/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace abel {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& value, const std::string& key) {
    double out = 0.0;
    const auto* begin = value.data();
    const auto* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    return out;
}

} // namespace

const std::string& ConfigMap::raw(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end())
        throw ConfigError("missing required key '" + key + "' in " + source);
    return it->second;
}

double ConfigMap::get_double(const std::string& key) const {
    return to_double(raw(key), key);
}

std::size_t ConfigMap::get_size(const std::string& key) const {
    const double v = get_double(key);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ConfigError("key '" + key + "': expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

std::uint64_t ConfigMap::get_u64(const std::string& key) const {
    const std::string& value = raw(key);
    std::uint64_t out = 0;
    const auto* begin = value.data();
    const auto* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" +
                          value + "'");
    return out;
}

std::vector<std::string> ConfigMap::get_list(const std::string& key) const {
    std::vector<std::string> items;
    std::istringstream is(raw(key));
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    if (items.empty()) throw ConfigError("key '" + key + "': empty list");
    return items;
}

ConfigMap parse_config_text(const std::string& text, const std::string& source) {
    ConfigMap map;
    map.source = source;
    std::istringstream is(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(source + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (map.entries.count(key))
            throw ConfigError(source + ":" + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        map.entries[key] = value;
    }
    return map;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

MethodSpec parse_method(const std::string& label) {
    MethodSpec m;
    m.label = label;
    if (label == "bel") {
        m.adjustment = AdjustmentSpec::none();
    } else if (label == "abel_log") {
        m.adjustment = AdjustmentSpec::log_rule();
    } else if (label == "abel_hp") {
        m.adjustment = AdjustmentSpec::high_precision({});
    } else if (label.rfind("abel_", 0) == 0) {
        const double a = to_double(label.substr(5), "methods");
        if (!(a > 0.0))
            throw ConfigError("method '" + label + "': fixed tuning value must be positive");
        m.adjustment = AdjustmentSpec::fixed(a);
    } else {
        throw ConfigError("unknown method '" + label +
                          "' (expected bel, abel_log, abel_hp or abel_<a>)");
    }
    return m;
}

SimConfig sim_config_from(const ConfigMap& map) {
    static const std::set<std::string> known = {
        "n",   "d",      "rho",          "methods",
        "gap", "levels", "block_lengths", "replications",
        "seed", "threads",
        "bootstrap.replications", "bootstrap.block_length"};
    for (const auto& [key, value] : map.entries)
        if (!known.count(key))
            throw ConfigError("unknown key '" + key + "' in " + map.source);

    SimConfig cfg;
    cfg.n = map.get_size("n");
    cfg.d = map.get_size("d");
    cfg.rho = map.get_double("rho");
    cfg.replications = map.get_size("replications");
    cfg.seed = map.get_u64("seed");
    if (map.has("gap")) cfg.gap = map.get_size("gap");
    if (map.has("threads"))
        cfg.threads = static_cast<unsigned>(map.get_size("threads"));

    if (cfg.n < 2) throw ConfigError("key 'n': sample size must be >= 2");
    if (cfg.d < 1) throw ConfigError("key 'd': dimension must be >= 1");
    if (std::abs(cfg.rho) >= 1.0) throw ConfigError("key 'rho': need |rho| < 1");
    if (cfg.replications < 1) throw ConfigError("key 'replications': must be >= 1");

    BootstrapSettings bs;
    if (map.has("bootstrap.replications"))
        bs.replications = map.get_size("bootstrap.replications");
    if (map.has("bootstrap.block_length"))
        bs.block_length = map.get_size("bootstrap.block_length");

    for (const std::string& label : map.get_list("methods")) {
        MethodSpec m = parse_method(label);
        if (m.adjustment.rule == AdjustmentSpec::Rule::high_precision)
            m.adjustment.bootstrap = bs;
        cfg.methods.push_back(std::move(m));
    }

    for (const std::string& entry : map.get_list("block_lengths")) {
        BlockEntry be;
        if (entry == "pro" || entry == "progressive") {
            be.progressive = true;
        } else {
            const double v = to_double(entry, "block_lengths");
            if (v < 1 || v != std::floor(v))
                throw ConfigError("key 'block_lengths': bad entry '" + entry + "'");
            be.M = static_cast<std::size_t>(v);
        }
        cfg.block_lengths.push_back(be);
    }

    for (const std::string& level : map.get_list("levels")) {
        const double v = to_double(level, "levels");
        if (!(v > 0.0 && v < 1.0))
            throw ConfigError("key 'levels': level " + level + " outside (0, 1)");
        cfg.levels.push_back(v);
    }
    return cfg;
}

} // namespace abel
