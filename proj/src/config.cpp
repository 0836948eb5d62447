#include "gebsde/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gebsde {

double ConfigValue::number(const std::string& where) const {
    if (auto* p = std::get_if<double>(&v_)) return *p;
    throw ConfigError(where + ": expected a number");
}

bool ConfigValue::boolean(const std::string& where) const {
    if (auto* p = std::get_if<bool>(&v_)) return *p;
    throw ConfigError(where + ": expected true/false");
}

const std::string& ConfigValue::str(const std::string& where) const {
    if (auto* p = std::get_if<std::string>(&v_)) return *p;
    throw ConfigError(where + ": expected a string");
}

const ConfigValue::Array& ConfigValue::array(const std::string& where) const {
    if (auto* p = std::get_if<Array>(&v_)) return *p;
    throw ConfigError(where + ": expected an array");
}

void ConfigSection::missing(const std::string& key) const {
    throw ConfigError("[" + name_ + "] missing key '" + key + "'");
}

const ConfigValue& ConfigSection::get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) missing(key);
    return it->second;
}

double ConfigSection::number(const std::string& key) const {
    return get(key).number("[" + name_ + "] " + key);
}

double ConfigSection::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::string ConfigSection::str(const std::string& key) const {
    return get(key).str("[" + name_ + "] " + key);
}

std::string ConfigSection::str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
}

bool ConfigSection::bool_or(const std::string& key, bool fallback) const {
    return has(key) ? get(key).boolean("[" + name_ + "] " + key) : fallback;
}

std::vector<double> ConfigSection::numbers(const std::string& key) const {
    const std::string where = "[" + name_ + "] " + key;
    const ConfigValue& v = get(key);
    if (v.is_number()) return {v.number(where)};
    std::vector<double> out;
    for (const auto& e : v.array(where)) out.push_back(e.number(where));
    return out;
}

std::vector<double> ConfigSection::numbers_or(const std::string& key,
                                              std::vector<double> fallback) const {
    return has(key) ? numbers(key) : std::move(fallback);
}

std::vector<std::string> ConfigSection::strings(const std::string& key) const {
    const std::string where = "[" + name_ + "] " + key;
    const ConfigValue& v = get(key);
    if (v.is_string()) return {v.str(where)};
    std::vector<std::string> out;
    for (const auto& e : v.array(where)) out.push_back(e.str(where));
    return out;
}

std::vector<std::vector<double>> ConfigSection::points(const std::string& key) const {
    const std::string where = "[" + name_ + "] " + key;
    const ConfigValue& v = get(key);
    std::vector<std::vector<double>> out;
    for (const auto& e : v.array(where)) {
        if (e.is_number()) {
            out.push_back({e.number(where)});
        } else {
            std::vector<double> pt;
            for (const auto& c : e.array(where)) pt.push_back(c.number(where));
            out.push_back(std::move(pt));
        }
    }
    return out;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class TomlParser {
public:
    explicit TomlParser(const std::string& text) : text_(text) {}

    std::map<std::string, ConfigSection> run() {
        std::map<std::string, std::map<std::string, ConfigValue>> sections;
        std::string current = "";
        std::istringstream in(text_);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip_comment(line);
            s = trim(s);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section header");
                current = trim(s.substr(1, s.size() - 2));
                if (current.empty())
                    throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
                sections[current];
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(s.substr(0, eq));
            std::string val = trim(s.substr(eq + 1));
            if (key.empty() || val.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            sections[current][key] = parse_value(val, lineno);
        }
        std::map<std::string, ConfigSection> out;
        for (auto& [name, kv] : sections) out.emplace(name, ConfigSection(name, std::move(kv)));
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    // strip a trailing comment, honoring quoted strings
    static std::string strip_comment(const std::string& s) {
        bool in_str = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_str = !in_str;
            else if (s[i] == '#' && !in_str) return s.substr(0, i);
        }
        return s;
    }

    ConfigValue parse_value(const std::string& v, int lineno) {
        std::size_t pos = 0;
        ConfigValue out = parse_value_at(v, pos, lineno);
        skip_ws(v, pos);
        if (pos != v.size())
            throw ConfigError("config line " + std::to_string(lineno) + ": trailing characters after value");
        return out;
    }

    static void skip_ws(const std::string& v, std::size_t& pos) {
        while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos])) != 0) ++pos;
    }

    ConfigValue parse_value_at(const std::string& v, std::size_t& pos, int lineno) {
        skip_ws(v, pos);
        if (pos >= v.size())
            throw ConfigError("config line " + std::to_string(lineno) + ": missing value");
        char c = v[pos];
        if (c == '"') {
            std::size_t end = v.find('"', pos + 1);
            if (end == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated string");
            std::string s = v.substr(pos + 1, end - pos - 1);
            pos = end + 1;
            return ConfigValue(std::move(s));
        }
        if (c == '[') {
            ++pos;
            ConfigValue::Array arr;
            skip_ws(v, pos);
            if (pos < v.size() && v[pos] == ']') { ++pos; return ConfigValue(std::move(arr)); }
            for (;;) {
                arr.push_back(parse_value_at(v, pos, lineno));
                skip_ws(v, pos);
                if (pos < v.size() && v[pos] == ',') { ++pos; continue; }
                if (pos < v.size() && v[pos] == ']') { ++pos; break; }
                throw ConfigError("config line " + std::to_string(lineno) + ": expected ',' or ']' in array");
            }
            return ConfigValue(std::move(arr));
        }
        if (v.compare(pos, 4, "true") == 0) { pos += 4; return ConfigValue(true); }
        if (v.compare(pos, 5, "false") == 0) { pos += 5; return ConfigValue(false); }
        double num = 0.0;
        const char* begin = v.data() + pos;
        auto [ptr, ec] = std::from_chars(begin, v.data() + v.size(), num);
        if (ec != std::errc())
            throw ConfigError("config line " + std::to_string(lineno) + ": malformed value '" + v.substr(pos) + "'");
        pos += static_cast<std::size_t>(ptr - begin);
        return ConfigValue(num);
    }

    const std::string& text_;
};

ConfigValue from_json(const nlohmann::json& j) {
    if (j.is_number()) return ConfigValue(j.get<double>());
    if (j.is_boolean()) return ConfigValue(j.get<bool>());
    if (j.is_string()) return ConfigValue(j.get<std::string>());
    if (j.is_array()) {
        ConfigValue::Array arr;
        for (const auto& e : j) arr.push_back(from_json(e));
        return ConfigValue(std::move(arr));
    }
    throw ConfigError("unsupported JSON value type in config");
}

std::map<std::string, ConfigSection> parse_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("JSON config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("JSON config must be an object of sections");
    std::map<std::string, ConfigSection> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_object())
            throw ConfigError("JSON config section '" + it.key() + "' must be an object");
        std::map<std::string, ConfigValue> kv;
        for (auto kit = it.value().begin(); kit != it.value().end(); ++kit)
            kv[kit.key()] = from_json(kit.value());
        out.emplace(it.key(), ConfigSection(it.key(), std::move(kv)));
    }
    return out;
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    cfg.text_ = text;
    cfg.hash_ = fnv1a(text);
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        cfg.sections_ = parse_json(text);
    } else {
        cfg.sections_ = TomlParser(text).run();
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const ConfigSection& Config::section(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw ConfigError("config is missing the [" + name + "] section");
    return it->second;
}

ConfigSection Config::section_or_empty(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) return ConfigSection(name, {});
    return it->second;
}

}  // namespace gebsde
