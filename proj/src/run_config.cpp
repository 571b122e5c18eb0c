#include "gazecap/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gazecap {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text, const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw InputError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw InputError(origin + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), trim(t.substr(eq + 1)));
    }
    return out;
}

RunConfig::RunConfig(std::vector<ConfigKey> schema) : schema_(std::move(schema)) {
    values_.reserve(schema_.size());
    for (const auto& k : schema_) values_.push_back(k.default_value);
}

bool RunConfig::known(const std::string& key) const {
    for (const auto& k : schema_) {
        if (k.name == key) return true;
    }
    return false;
}

std::size_t RunConfig::slot(const std::string& key) const {
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].name == key) return i;
    }
    throw InputError("unknown config key '" + key + "'");
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path.string());
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
    for (const auto& [k, v] : parse_key_values(text, origin)) {
        if (!known(k)) throw InputError(origin + ": unknown config key '" + k + "'");
        set(k, v);
    }
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[slot(key)] = value; }

const std::string& RunConfig::get(const std::string& key) const { return values_[slot(key)]; }

long long RunConfig::get_int(const std::string& key) const {
    const std::string& s = get(key);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw InputError("config key '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string& s = get(key);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw InputError("config key '" + key + "' expects a non-negative integer, got '" + s + "'");
    }
    return v;
}

Real RunConfig::get_real(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t used = 0;
        const Real v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError("config key '" + key + "' expects a number, got '" + s + "'");
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw InputError("config key '" + key + "' expects a boolean, got '" + s + "'");
}

std::string RunConfig::echo() const { return echo(""); }

std::string RunConfig::echo(const std::string& prefix) const {
    std::string out;
    for (std::size_t i = 0; i < schema_.size(); ++i) out += prefix + schema_[i].name + "=" + values_[i] + "\n";
    return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < schema_.size(); ++i) out.emplace_back(schema_[i].name, values_[i]);
    return out;
}

}  // namespace gazecap
