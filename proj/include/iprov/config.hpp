#pragma once

#include <map>
#include <string>
#include <vector>

#include "iprov/pairwise.hpp"

namespace iprov {

/// `key = value` lines; '#' starts a comment; lists are comma-separated.
class KeyValues {
public:
    static KeyValues parse(const std::string& text);
    static KeyValues parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<std::string> get_string_list(const std::string& key) const;
    std::vector<long long> get_int_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
};

/// Effective run configuration: model tunables plus paths and defaults.
struct Config {
    ModelConfig model;
    std::size_t k_default = 10;
    int threads = 1;
    std::uint64_t seed = 42;
    std::string index_path = "index.ipdx";
    std::string store_path = "edges.ipmr";
    std::string manifest_path = "manifest.json";

    static Config from_file(const std::string& path);
    static Config from_keyvalues(const KeyValues& kv);

    /// Full effective configuration, echoed for reproducibility.
    std::string describe() const;
};

} // namespace iprov
