#include "iprov/config.hpp"

#include <fstream>
#include <sstream>

#include "iprov/errors.hpp"

namespace iprov {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

KeyValues KeyValues::parse(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            raise(Errc::ParseError, "config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(trimmed.substr(0, eq));
        if (key.empty())
            raise(Errc::ParseError, "config line " + std::to_string(lineno) + ": empty key");
        kv.values_[key] = trim(trimmed.substr(eq + 1));
    }
    return kv;
}

KeyValues KeyValues::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (...) {
        raise(Errc::ParseError, "config key '" + key + "': not a number: " + it->second);
    }
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (...) {
        raise(Errc::ParseError, "config key '" + key + "': not an integer: " + it->second);
    }
}

std::vector<std::string> KeyValues::get_string_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<long long> KeyValues::get_int_list(const std::string& key) const {
    std::vector<long long> out;
    for (const std::string& s : get_string_list(key)) {
        try {
            out.push_back(std::stoll(s));
        } catch (...) {
            raise(Errc::ParseError, "config key '" + key + "': not an integer: " + s);
        }
    }
    return out;
}

Config Config::from_keyvalues(const KeyValues& kv) {
    Config c;
    c.model.tau_rel = kv.get_double("tau_rel", c.model.tau_rel);
    c.model.ratio_test = kv.get_double("ratio_test", c.model.ratio_test);
    c.model.ransac_iterations = static_cast<int>(kv.get_int("ransac_iterations", c.model.ransac_iterations));
    c.model.ransac_seed = static_cast<std::uint64_t>(kv.get_int("ransac_seed", static_cast<long long>(c.model.ransac_seed)));
    c.model.inlier_tolerance = kv.get_double("inlier_tolerance", c.model.inlier_tolerance);
    c.model.evidence_w1 = kv.get_double("evidence_w1", c.model.evidence_w1);
    c.model.evidence_w2 = kv.get_double("evidence_w2", c.model.evidence_w2);
    c.model.periodicity_noise_floor =
        kv.get_double("periodicity_noise_floor", c.model.periodicity_noise_floor);
    c.model.blockiness_noise_floor =
        kv.get_double("blockiness_noise_floor", c.model.blockiness_noise_floor);
    if (kv.has("quality_sweep")) {
        c.model.quality_sweep.clear();
        for (long long q : kv.get_int_list("quality_sweep"))
            c.model.quality_sweep.push_back(static_cast<int>(q));
        if (c.model.quality_sweep.empty())
            raise(Errc::ParseError, "quality_sweep must not be empty");
    }
    c.k_default = static_cast<std::size_t>(kv.get_int("k_default", static_cast<long long>(c.k_default)));
    c.threads = static_cast<int>(kv.get_int("threads", c.threads));
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
    c.index_path = kv.get("index_path", c.index_path);
    c.store_path = kv.get("store_path", c.store_path);
    c.manifest_path = kv.get("manifest_path", c.manifest_path);
    return c;
}

Config Config::from_file(const std::string& path) {
    return from_keyvalues(KeyValues::parse_file(path));
}

std::string Config::describe() const {
    std::ostringstream s;
    s << "tau_rel = " << model.tau_rel << "\n"
      << "ratio_test = " << model.ratio_test << "\n"
      << "ransac_iterations = " << model.ransac_iterations << "\n"
      << "ransac_seed = " << model.ransac_seed << "\n"
      << "inlier_tolerance = " << model.inlier_tolerance << "\n"
      << "evidence_w1 = " << model.evidence_w1 << "\n"
      << "evidence_w2 = " << model.evidence_w2 << "\n"
      << "periodicity_noise_floor = " << model.periodicity_noise_floor << "\n"
      << "blockiness_noise_floor = " << model.blockiness_noise_floor << "\n";
    s << "quality_sweep = ";
    for (std::size_t i = 0; i < model.quality_sweep.size(); ++i)
        s << (i ? "," : "") << model.quality_sweep[i];
    s << "\n";
    s << "k_default = " << k_default << "\n"
      << "threads = " << threads << "\n"
      << "seed = " << seed << "\n"
      << "index_path = " << index_path << "\n"
      << "store_path = " << store_path << "\n"
      << "manifest_path = " << manifest_path << "\n";
    return s.str();
}

} // namespace iprov
