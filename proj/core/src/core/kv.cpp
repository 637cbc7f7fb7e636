#include "stda/core/kv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stda {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" + text + "'");
    }
    return v;
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& source_name) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(source_name + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw std::invalid_argument(source_name + ":" + std::to_string(line_no) + ": empty key");
        }
        kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void KeyValues::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << to_string();
}

std::string KeyValues::to_string() const {
    std::string s;
    for (const auto& [k, v] : values_) {
        s += k + " = " + v + "\n";
    }
    return s;
}

void KeyValues::set(const std::string& key, const std::string& value) { values_[key] = value; }
void KeyValues::set(const std::string& key, double value) { values_[key] = format_double(value); }
void KeyValues::set(const std::string& key, long long value) { values_[key] = std::to_string(value); }

void KeyValues::merge(const KeyValues& other) {
    for (const auto& [k, v] : other.values_) {
        values_[k] = v;
    }
}

const std::string& KeyValues::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw std::out_of_range("missing required config key '" + key + "'");
    }
    return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

double KeyValues::get_double(const std::string& key, double fallback) const {
    return contains(key) ? get_double(key) : fallback;
}

long long KeyValues::get_int(const std::string& key) const {
    const std::string& text = get_string(key);
    long long v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument("config key '" + key + "': not an integer: '" + text + "'");
    }
    return v;
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
    return contains(key) ? get_int(key) : fallback;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
    if (!contains(key)) {
        return fallback;
    }
    const std::string& v = get_string(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw std::invalid_argument("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& piece : split_list(get_string(key), ',')) {
        out.push_back(parse_double(key, piece));
    }
    return out;
}

std::vector<double> KeyValues::get_doubles(const std::string& key, std::vector<double> fallback) const {
    return contains(key) ? get_doubles(key) : fallback;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw std::runtime_error("format_double failed");
    }
    return std::string(buf, ptr);
}

std::vector<std::string> split_list(const std::string& text, char delim) {
    std::vector<std::string> out;
    std::string piece;
    std::istringstream in(text);
    while (std::getline(in, piece, delim)) {
        piece = trim(piece);
        if (!piece.empty()) {
            out.push_back(piece);
        }
    }
    return out;
}

}  // namespace stda
