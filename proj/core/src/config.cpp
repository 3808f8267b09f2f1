#include "hhl/config.hpp"

#include <fstream>
#include <sstream>

namespace hhl {

namespace {
std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config line missing '=': " + line);
        cfg.data_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool Config::has(const std::string& s, const std::string& k) const {
    auto it = data_.find(s);
    return it != data_.end() && it->second.count(k) > 0;
}

std::string Config::get(const std::string& s, const std::string& k,
                        const std::string& fallback) const {
    auto it = data_.find(s);
    if (it == data_.end()) return fallback;
    auto jt = it->second.find(k);
    return jt == it->second.end() ? fallback : jt->second;
}

double Config::get_num(const std::string& s, const std::string& k, double fallback) const {
    std::string v = get(s, k, "");
    if (v.empty()) return fallback;
    return std::stod(v);
}

std::uint64_t Config::get_u64(const std::string& s, const std::string& k,
                              std::uint64_t fallback) const {
    std::string v = get(s, k, "");
    if (v.empty()) return fallback;
    return std::stoull(v);
}

std::vector<double> Config::get_list(const std::string& s, const std::string& k,
                                     std::vector<double> fallback) const {
    std::string v = get(s, k, "");
    if (v.empty()) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) out.push_back(std::stod(trim(item)));
    return out;
}

std::pair<double, double> Config::get_range(const std::string& s, const std::string& k,
                                            std::pair<double, double> fallback) const {
    std::string v = get(s, k, "");
    if (v.empty()) return fallback;
    auto dots = v.find("..");
    if (dots == std::string::npos) throw std::runtime_error("range must be 'lo .. hi': " + v);
    return {std::stod(trim(v.substr(0, dots))), std::stod(trim(v.substr(dots + 2)))};
}

rss::RssParams rss_params_from(const Config& cfg) {
    rss::RssParams p;
    auto rat = [&](const char* key, const Rational& dflt) {
        std::string v = cfg.get("rss", key, "");
        if (v.empty()) return dflt;
        // parse decimals exactly
        auto dot = v.find('.');
        if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(v));
        std::string digits = v.substr(0, dot) + v.substr(dot + 1);
        boost::multiprecision::cpp_int den = 1;
        for (std::size_t i = 0; i < v.size() - dot - 1; ++i) den *= 10;
        return Rational(boost::multiprecision::cpp_int(digits), den);
    };
    p.rho = rat("rho", p.rho);
    p.a_max = rat("a_max", p.a_max);
    p.b_min = rat("b_min", p.b_min);
    p.b_max = rat("b_max", p.b_max);
    p.v_min = rat("v_min", p.v_min);
    p.v_max = rat("v_max", p.v_max);
    p.t_lc = rat("t_lc", p.t_lc);
    p.validate();
    return p;
}

Box box_from(const Config& cfg, const VocabPtr& vocab, const Box& defaults) {
    Box box = defaults;
    auto it = cfg.sections().find("box");
    if (it == cfg.sections().end()) return box;
    for (auto& [name, val] : it->second) {
        auto r = cfg.get_range("box", name, {0, 0});
        box.set(vocab->intern(name), {r.first, r.second});
    }
    return box;
}

OracleConfig oracle_config_from(const Config& cfg, Box default_box) {
    OracleConfig oc;
    oc.box = std::move(default_box);
    oc.max_depth = static_cast<int>(cfg.get_num("oracle", "depth", oc.max_depth));
    oc.falsify_budget = static_cast<int>(cfg.get_num("oracle", "falsify_budget", oc.falsify_budget));
    oc.seed = cfg.get_u64("oracle", "seed", oc.seed);
    return oc;
}

}  // namespace hhl
