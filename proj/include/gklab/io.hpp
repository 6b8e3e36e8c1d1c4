// io.hpp - CSV/JSON emission and content hashing
#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "gklab/field.hpp"

namespace gklab::io {

// Shortest round-trip text would vary in length; 17 significant digits in
// %g style are fixed-width in meaning and independent of the locale.
inline std::string fmt17(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (ec != std::errc()) throw std::runtime_error("fmt17: conversion failed");
    return std::string(buf, ptr);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

// RFC 4180 table: header row, CRLF line breaks, columns of equal length.
// NaN marks a missing value and is written as an empty field.
inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw std::invalid_argument("csv: header/column mismatch");
    const size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("csv: ragged columns");
    std::string out;
    for (size_t k = 0; k < header.size(); ++k) {
        if (k) out += ',';
        out += csv_escape(header[k]);
    }
    out += "\r\n";
    for (size_t r = 0; r < rows; ++r) {
        for (size_t k = 0; k < columns.size(); ++k) {
            if (k) out += ',';
            if (!std::isnan(columns[k][r])) out += fmt17(columns[k][r]);
        }
        out += "\r\n";
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    write_text(path, csv_table(header, columns));
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

// nlohmann::json objects keep keys sorted, so dump() is canonical.
inline std::string content_hash(const nlohmann::json& j) { return sha256_hex(j.dump()); }

// Parses a CSV with a header row into named numeric columns.
struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name) const {
        for (size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return columns[k];
        throw std::runtime_error("csv: no column named '" + name + "'");
    }
};

inline CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    CsvData d;
    std::string line;
    int lineno = 0;
    auto split = [](std::string s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
        std::vector<std::string> out;
        std::string cur;
        bool quoted = false;
        for (size_t i = 0; i < s.size(); ++i) {
            const char ch = s[i];
            if (quoted) {
                if (ch == '"' && i + 1 < s.size() && s[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (ch == '"') {
                    quoted = false;
                } else {
                    cur += ch;
                }
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        out.push_back(cur);
        return out;
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (d.header.empty()) {
            d.header = cells;
            d.columns.resize(cells.size());
            continue;
        }
        if (cells.size() != d.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(d.header.size()) + " fields, got " +
                                     std::to_string(cells.size()));
        for (size_t k = 0; k < cells.size(); ++k) {
            if (cells[k].empty()) {
                d.columns[k].push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            double v = 0.0;
            const char* b = cells[k].data();
            const char* e = b + cells[k].size();
            auto [ptr, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || ptr != e)
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                         ": not a number: '" + cells[k] + "'");
            d.columns[k].push_back(v);
        }
    }
    if (d.header.empty()) throw std::runtime_error(path.string() + ": empty file");
    return d;
}

// ---------------------------------------------------------------------------
// Reduced fields: columnar CSV plus a JSON header

inline nlohmann::json grid_json(const Grid& g) {
    return {{"n", g.size()},
            {"t_max", g.spec().t_max},
            {"scheme", scheme_name(g.spec().scheme)},
            {"map_scale", g.spec().map_scale}};
}

template <class T>
nlohmann::json field_header(const ReducedField<T>& f) {
    return {{"kind", f.kind},
            {"components", Components<T>::size},
            {"grid", grid_json(f.grid())},
            {"a", f.dom->a},
            {"b", f.dom->b}};
}

template <class T>
std::string field_csv(const ReducedField<T>& f) {
    constexpr int m = Components<T>::size;
    std::vector<std::string> header{"t"};
    std::vector<std::vector<double>> cols{f.grid().t()};
    for (int k = 0; k < m; ++k) {
        header.push_back(m == 1 ? f.kind : "c" + std::to_string(k));
        std::vector<double> col(f.size());
        for (int i = 0; i < f.size(); ++i) col[i] = Components<T>::data(f.v[i])[k];
        cols.push_back(std::move(col));
    }
    return csv_table(header, cols);
}

template <class T>
void write_field(const std::filesystem::path& stem, const ReducedField<T>& f) {
    write_text(stem.string() + ".csv", field_csv(f));
    write_json(stem.string() + ".json", field_header(f));
}

}  // namespace gklab::io
