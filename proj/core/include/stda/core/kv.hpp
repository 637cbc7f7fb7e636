#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace stda {

/// Flat `key = value` text: one pair per line, `#` starts a comment, blank
/// lines ignored. Keys are kept sorted so serialization is canonical.
class KeyValues {
public:
    static KeyValues parse(const std::string& text, const std::string& source_name = "<string>");
    static KeyValues load(const std::filesystem::path& path);

    void save(const std::filesystem::path& path) const;
    std::string to_string() const;

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void merge(const KeyValues& other);
    void erase(const std::string& key) { values_.erase(key); }

    /// Typed getters throw std::invalid_argument naming the key on malformed values
    /// and std::out_of_range when a required key is missing.
    const std::string& get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

    const std::map<std::string, std::string>& items() const { return values_; }

    bool operator==(const KeyValues&) const = default;

private:
    std::map<std::string, std::string> values_;
};

/// Round-trippable decimal rendering of a double (shortest form that parses back exactly).
std::string format_double(double v);

/// Split on a delimiter, trimming whitespace and dropping empty pieces.
std::vector<std::string> split_list(const std::string& text, char delim);

}  // namespace stda
