#include "rotkit/config.hpp"

#include <fstream>

#include "rotkit/errors.hpp"

namespace rotkit::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    Config c;
    std::string line;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + " line " + std::to_string(lineno) +
                              ": expected `key = value`");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + " line " + std::to_string(lineno) +
                              ": empty key");
        c.kv_[key] = value;
    }
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": bad number '" + it->second + "'");
    }
}

long Config::get_long(const std::string& key, long fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": bad integer '" + it->second + "'");
    }
}

uint64_t Config::get_seed(const std::string& key, uint64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return static_cast<uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": bad seed '" + it->second + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "on") return true;
    if (it->second == "false" || it->second == "0" || it->second == "off") return false;
    throw ConfigError("config key " + key + ": bad boolean '" + it->second + "'");
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t') {
            cur.push_back(c);
        }
    }
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    return out;
}

} // namespace

std::vector<long> Config::get_long_list(const std::string& key,
                                        const std::vector<long>& fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<long> out;
    for (const auto& tok : split_list(it->second)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stol(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": bad integer '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
}

std::vector<std::string> Config::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    auto out = split_list(it->second);
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
}

void Config::require_known(const std::set<std::string>& known) const {
    std::string bad;
    for (const auto& [k, v] : kv_) {
        if (!known.count(k)) {
            if (!bad.empty()) bad += ", ";
            bad += k;
        }
    }
    if (!bad.empty()) throw ConfigError("unknown config keys: " + bad);
}

} // namespace rotkit::io
