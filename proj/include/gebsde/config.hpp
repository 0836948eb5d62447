#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gebsde/errors.hpp"

namespace gebsde {

/// One scalar or (possibly nested) array value from a config file.
class ConfigValue {
public:
    using Array = std::vector<ConfigValue>;
    using Storage = std::variant<double, bool, std::string, Array>;

    ConfigValue() : v_(0.0) {}
    explicit ConfigValue(Storage v) : v_(std::move(v)) {}

    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }

    double number(const std::string& where) const;
    bool boolean(const std::string& where) const;
    const std::string& str(const std::string& where) const;
    const Array& array(const std::string& where) const;

private:
    Storage v_;
};

/// Flat key/value block ([section] in TOML, object member in JSON).
class ConfigSection {
public:
    ConfigSection() = default;
    ConfigSection(std::string name, std::map<std::string, ConfigValue> kv)
        : name_(std::move(name)), kv_(std::move(kv)) {}

    const std::string& name() const { return name_; }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::string str(const std::string& key) const;
    std::string str_or(const std::string& key, const std::string& fallback) const;
    bool bool_or(const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const;
    /// Accepts a string or an array of strings; always returns a vector.
    std::vector<std::string> strings(const std::string& key) const;
    /// Array of points: [[a,b],...] or a flat number array read as 1-d points.
    std::vector<std::vector<double>> points(const std::string& key) const;

    const std::map<std::string, ConfigValue>& items() const { return kv_; }

private:
    [[noreturn]] void missing(const std::string& key) const;
    const ConfigValue& get(const std::string& key) const;

    std::string name_;
    std::map<std::string, ConfigValue> kv_;
};

/// Whole config file: named sections of key/value pairs. TOML-style blocks
/// and an equivalent JSON object-of-objects are both accepted.
class Config {
public:
    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);

    bool has(const std::string& section) const { return sections_.count(section) != 0; }
    const ConfigSection& section(const std::string& name) const;
    /// Empty section when absent (for optional blocks).
    ConfigSection section_or_empty(const std::string& name) const;

    /// FNV-1a hash of the raw text, for report traceability.
    std::uint64_t hash() const { return hash_; }
    const std::string& text() const { return text_; }

private:
    std::map<std::string, ConfigSection> sections_;
    std::string text_;
    std::uint64_t hash_ = 0;
};

}  // namespace gebsde
