#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace rotkit::io {

/// Flat `key = value` configuration: one assignment per line, '#' comments,
/// dotted keys for experiment sections. Later assignments (and command-line
/// overrides) win.
class Config {
  public:
    Config() = default;

    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    uint64_t get_seed(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated values; "1,2,3".
    std::vector<long> get_long_list(const std::string& key,
                                    const std::vector<long>& fallback) const;
    std::vector<std::string> get_string_list(
        const std::string& key, const std::vector<std::string>& fallback) const;

    /// Collects every key not in `known` and throws ConfigError listing all
    /// of them at once.
    void require_known(const std::set<std::string>& known) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

} // namespace rotkit::io
