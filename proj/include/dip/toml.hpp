#pragma once

// Minimal TOML subset: [sections], key = value with strings, integers,
// floats, booleans and flat arrays of numbers. Covers the config surface of
// this project; nesting and multi-line values are not supported.

#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dip/matrix.hpp"

namespace dip::toml {

using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<double>>;

class Table {
  public:
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_str(const std::string& key) const {
        return std::get<std::string>(require(key, "string"));
    }
    std::string get_str(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_str(key) : fallback;
    }

    std::int64_t get_int(const std::string& key) const {
        const Value& v = require(key, "integer");
        if (!std::holds_alternative<std::int64_t>(v))
            throw ConfigError("config key '" + key + "': expected integer");
        return std::get<std::int64_t>(v);
    }
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    double get_double(const std::string& key) const {
        const Value& v = require(key, "number");
        if (std::holds_alternative<std::int64_t>(v)) return static_cast<double>(std::get<std::int64_t>(v));
        if (std::holds_alternative<double>(v)) return std::get<double>(v);
        throw ConfigError("config key '" + key + "': expected number");
    }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    bool get_bool(const std::string& key) const {
        const Value& v = require(key, "boolean");
        if (!std::holds_alternative<bool>(v)) throw ConfigError("config key '" + key + "': expected boolean");
        return std::get<bool>(v);
    }
    bool get_bool(const std::string& key, bool fallback) const {
        return has(key) ? get_bool(key) : fallback;
    }

    std::vector<double> get_array(const std::string& key) const {
        const Value& v = require(key, "array");
        if (!std::holds_alternative<std::vector<double>>(v))
            throw ConfigError("config key '" + key + "': expected array");
        return std::get<std::vector<double>>(v);
    }
    std::vector<double> get_array(const std::string& key, std::vector<double> fallback) const {
        return has(key) ? get_array(key) : std::move(fallback);
    }

    void set(const std::string& key, Value v) { values_[key] = std::move(v); }

    const std::map<std::string, Value>& entries() const { return values_; }

  private:
    std::map<std::string, Value> values_;

    const Value& require(const std::string& key, const char* kind) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("config: missing required " + std::string(kind) + " key '" + key + "'");
        return it->second;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline Value parse_scalar(const std::string& raw, int line_no) {
    std::string s = trim(raw);
    if (s.empty()) throw ConfigError("toml line " + std::to_string(line_no) + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated string");
        return s.substr(1, s.size() - 2);
    }
    if (s == "true") return true;
    if (s == "false") return false;
    // integer or float
    bool is_float = s.find_first_of(".eE") != std::string::npos &&
                    s.find_first_not_of("+-0123456789.eE") == std::string::npos;
    errno = 0;
    char* end = nullptr;
    if (!is_float) {
        long long v = std::strtoll(s.c_str(), &end, 10);
        if (end && *end == '\0' && errno == 0) return static_cast<std::int64_t>(v);
    }
    double d = std::strtod(s.c_str(), &end);
    if (end && *end == '\0' && errno == 0) return d;
    throw ConfigError("toml line " + std::to_string(line_no) + ": cannot parse value '" + s + "'");
}

}  // namespace detail

inline Table parse(const std::string& text) {
    Table table;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // strip comments outside strings
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            else if (line[i] == '#' && !in_str) {
                line = line.substr(0, i);
                break;
            }
        }
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("toml line " + std::to_string(line_no) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("toml line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("toml line " + std::to_string(line_no) + ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']')
                throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated array");
            std::vector<double> arr;
            std::string body = val.substr(1, val.size() - 2);
            std::istringstream items(body);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = detail::trim(item);
                if (item.empty()) continue;
                Value v = detail::parse_scalar(item, line_no);
                if (std::holds_alternative<std::int64_t>(v))
                    arr.push_back(static_cast<double>(std::get<std::int64_t>(v)));
                else if (std::holds_alternative<double>(v))
                    arr.push_back(std::get<double>(v));
                else
                    throw ConfigError("toml line " + std::to_string(line_no) + ": arrays hold numbers only");
            }
            table.set(full, std::move(arr));
        } else {
            table.set(full, detail::parse_scalar(val, line_no));
        }
    }
    return table;
}

inline std::string serialize_value(const Value& v) {
    if (std::holds_alternative<std::string>(v)) return "\"" + std::get<std::string>(v) + "\"";
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    if (std::holds_alternative<double>(v)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v));
        std::string s(buf);
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        return s;
    }
    const auto& arr = std::get<std::vector<double>>(v);
    std::string s = "[";
    for (std::size_t i = 0; i < arr.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", arr[i]);
        s += buf;
        if (i + 1 < arr.size()) s += ", ";
    }
    return s + "]";
}

// Serializes grouped by section, deterministically ordered.
inline std::string serialize(const Table& table) {
    std::map<std::string, std::map<std::string, const Value*>> sections;
    for (const auto& [key, value] : table.entries()) {
        std::size_t dot = key.rfind('.');
        if (dot == std::string::npos) sections[""][key] = &value;
        else sections[key.substr(0, dot)][key.substr(dot + 1)] = &value;
    }
    std::string out;
    for (const auto& [section, entries] : sections) {
        if (!section.empty()) out += "[" + section + "]\n";
        for (const auto& [key, value] : entries) out += key + " = " + serialize_value(*value) + "\n";
        out += "\n";
    }
    if (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

}  // namespace dip::toml
