// Minimal INI-style configuration: [section] headers, key = value lines,
// '#' comments. Values are numbers, words, ranges "lo .. hi" or lists.
#pragma once

#include "hhl/interval.hpp"
#include "hhl/rss.hpp"

#include <map>

namespace hhl {

class Config {
public:
    Config() = default;
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_num(const std::string& section, const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 std::vector<double> fallback) const;
    std::pair<double, double> get_range(const std::string& section, const std::string& key,
                                        std::pair<double, double> fallback) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return data_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

// [rss] section with the seven constants
rss::RssParams rss_params_from(const Config& cfg);

// [box] section: one range per variable name
Box box_from(const Config& cfg, const VocabPtr& vocab, const Box& defaults);

OracleConfig oracle_config_from(const Config& cfg, Box default_box);

}  // namespace hhl
