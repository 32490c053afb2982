#pragma once

#include <chanscope/core.hpp>

#include <nlohmann/json.hpp>

#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace chanscope::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Calls `fn(line_number, json)` for every non-blank line; malformed JSON raises ParseError.
inline void for_each_jsonl(std::istream& in, const std::function<void(std::size_t, const json&)>& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        try {
            fn(lineno, j);
        } catch (const ParseError&) {
            throw;
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("schema violation: ") + e.what());
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
}

/// Typed field access with schema errors phrased for humans.
template <typename T>
T require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
    if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw Error(std::string("field '") + key + "' must be a string");
    } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw Error(std::string("field '") + key + "' must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw Error(std::string("field '") + key + "' must be a number");
    }
    return it->get<T>();
}

inline std::optional<std::string> optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(std::string("field '") + key + "' must be a string or null");
    return it->get<std::string>();
}

inline std::vector<double> require_vector(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) throw Error(std::string("field '") + key + "' must be an array");
    std::vector<double> v;
    v.reserve(it->size());
    for (const auto& x : *it) {
        if (!x.is_number()) throw Error(std::string("field '") + key + "' must contain numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

// ---------------------------------------------------------------------------
// CSV. Fields are quoted only when they contain a separator, quote or newline.

inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw Error("unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

/// Reads a headed CSV; `fn(line_number, fields)` is called per data row. The header must match.
inline void for_each_csv_row(std::istream& in, const std::vector<std::string>& header,
                             const std::function<void(std::size_t, const std::vector<std::string>&)>& fn) {
    std::string line;
    std::size_t lineno = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        try {
            fields = split_csv_line(line);
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
        if (!seen_header) {
            if (fields != header) {
                std::string expected;
                for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
                throw ParseError(lineno, "unexpected header, expected '" + expected + "'");
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != header.size())
            throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                         std::to_string(fields.size()));
        try {
            fn(lineno, fields);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!seen_header) throw ParseError(0, "missing CSV header");
}

inline std::int64_t parse_int(std::string_view s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw Error("not an integer: '" + std::string(s) + "'");
    return v;
}

inline double parse_real(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw Error("not a number: '" + std::string(s) + "'");
    return v;
}

inline bool parse_bool(std::string_view s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw Error("not a boolean: '" + std::string(s) + "'");
}

} // namespace chanscope::io
