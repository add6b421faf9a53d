#pragma once

// Flat `key = value` configuration files: one assignment per line, `#` starts
// a comment, blank lines ignored. Parsing and typed access are total: every
// failure names the offending key and line. Consumers mark keys as they read
// them and finish with reject_unknown(), so misspelled keys are caught
// instead of silently ignored.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace randdyn {

class Config {
public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ValidationError(cfg.where(lineno) + ": expected `key = value`");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw ValidationError(cfg.where(lineno) + ": empty key");
            for (char c : key)
                if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
                    throw ValidationError(cfg.where(lineno) + ": bad character in key '" + key + "'");
            if (cfg.entries_.count(key))
                throw ValidationError(cfg.where(lineno) + ": duplicate key '" + key + "'");
            cfg.entries_[key] = Entry{value, lineno, false};
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("config: cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string require_string(const std::string& key) {
        auto* e = find(key);
        if (!e) throw ValidationError(origin_ + ": missing required key '" + key + "'");
        return e->value;
    }

    std::optional<std::string> get_string(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        return e->value;
    }

    double require_double(const std::string& key) { return parse_double(key, require_raw(key)); }
    std::int64_t require_int(const std::string& key) { return parse_int(key, require_raw(key)); }
    std::uint64_t require_uint64(const std::string& key) { return parse_uint64(key, require_raw(key)); }

    double get_double(const std::string& key, double fallback) {
        auto* e = find(key);
        return e ? parse_double(key, *e) : fallback;
    }
    std::int64_t get_int(const std::string& key, std::int64_t fallback) {
        auto* e = find(key);
        return e ? parse_int(key, *e) : fallback;
    }
    bool get_bool(const std::string& key, bool fallback) {
        auto* e = find(key);
        if (!e) return fallback;
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        throw ValidationError(where(e->line) + ": value of '" + key + "' must be true or false");
    }

    std::vector<double> require_double_list(const std::string& key) {
        return parse_double_list(key, require_raw(key));
    }
    std::optional<std::vector<double>> get_double_list(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        return parse_double_list(key, *e);
    }
    std::optional<std::vector<std::int64_t>> get_int_list(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        std::vector<std::int64_t> out;
        for (const auto& part : split_list(key, *e)) out.push_back(parse_int_token(key, e->line, part));
        return out;
    }

    // comma-separated `t:s` pairs
    std::optional<std::vector<std::pair<double, double>>> get_pair_list(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        std::vector<std::pair<double, double>> out;
        for (const auto& part : split_list(key, *e)) {
            const auto colon = part.find(':');
            if (colon == std::string::npos)
                throw ValidationError(where(e->line) + ": entries of '" + key + "' must look like t:s");
            out.emplace_back(parse_double_token(key, e->line, trim(part.substr(0, colon))),
                             parse_double_token(key, e->line, trim(part.substr(colon + 1))));
        }
        return out;
    }

    // every key must have been consumed by now
    void reject_unknown() const {
        for (const auto& [key, e] : entries_)
            if (!e.used)
                throw ValidationError(where(e.line) + ": unknown key '" + key + "'");
    }

    const std::string& origin() const { return origin_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        bool used = false;
    };

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    std::string where(int line) const { return origin_ + ":" + std::to_string(line); }

    Entry* find(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    Entry& require_raw(const std::string& key) {
        auto* e = find(key);
        if (!e) throw ValidationError(origin_ + ": missing required key '" + key + "'");
        return *e;
    }

    double parse_double_token(const std::string& key, int line, const std::string& tok) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ValidationError(where(line) + ": value of '" + key + "' is not a number: '" + tok + "'");
        }
    }

    std::int64_t parse_int_token(const std::string& key, int line, const std::string& tok) const {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ValidationError(where(line) + ": value of '" + key + "' is not an integer: '" + tok + "'");
        }
    }

    double parse_double(const std::string& key, const Entry& e) const {
        return parse_double_token(key, e.line, e.value);
    }
    std::int64_t parse_int(const std::string& key, const Entry& e) const {
        return parse_int_token(key, e.line, e.value);
    }
    std::uint64_t parse_uint64(const std::string& key, const Entry& e) const {
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ValidationError(where(e.line) + ": value of '" + key + "' is not an unsigned integer: '" +
                                  e.value + "'");
        }
    }

    std::vector<std::string> split_list(const std::string& key, const Entry& e) const {
        std::vector<std::string> parts;
        std::string cur;
        std::istringstream in(e.value);
        while (std::getline(in, cur, ',')) {
            const std::string tok = trim(cur);
            if (tok.empty())
                throw ValidationError(where(e.line) + ": empty entry in list '" + key + "'");
            parts.push_back(tok);
        }
        if (parts.empty()) throw ValidationError(where(e.line) + ": list '" + key + "' is empty");
        return parts;
    }

    std::vector<double> parse_double_list(const std::string& key, const Entry& e) const {
        std::vector<double> out;
        for (const auto& part : split_list(key, e)) out.push_back(parse_double_token(key, e.line, part));
        return out;
    }

    std::map<std::string, Entry> entries_;
    std::string origin_;
};

}  // namespace randdyn
