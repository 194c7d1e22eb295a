#pragma once

#include <cstddef>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace magzoll {

/// Numbers in reports and CSV: 15 significant digits.
inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

struct CsvBlock {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows)
{
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

inline void write_csv(std::ostream& out, const CsvBlock& block) { write_csv(out, block.header, block.rows); }

/// Line-based structured report:
///
///   key = value
///   ...
///
///   [block]
///   col,col
///   v,v
///
/// Blocks are separated by blank lines.
struct Report {
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<CsvBlock> blocks;

    void set(const std::string& key, double v) { fields.emplace_back(key, fmt(v)); }
    void set(const std::string& key, bool v) { fields.emplace_back(key, v ? "true" : "false"); }
    void set(const std::string& key, std::size_t v) { fields.emplace_back(key, std::to_string(v)); }
    void set(const std::string& key, std::string v) { fields.emplace_back(key, std::move(v)); }
    void set(const std::string& key, const char* v) { fields.emplace_back(key, v); }

    const std::string* find(const std::string& key) const
    {
        for (const auto& [k, v] : fields) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    const CsvBlock* block(const std::string& name) const
    {
        for (const auto& b : blocks) {
            if (b.name == name) return &b;
        }
        return nullptr;
    }

    std::string emit() const
    {
        std::ostringstream out;
        for (const auto& [k, v] : fields) out << k << " = " << v << '\n';
        for (const auto& b : blocks) {
            out << "\n[" << b.name << "]\n";
            write_csv(out, b);
        }
        return out.str();
    }
};

inline Report parse_report(const std::string& text)
{
    Report rep;
    std::istringstream in(text);
    std::string line;
    CsvBlock* current = nullptr;
    bool want_header = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty()) {
            current = nullptr;
            continue;
        }
        if (line.front() == '[' && line.back() == ']') {
            rep.blocks.push_back({line.substr(1, line.size() - 2), {}, {}});
            current = &rep.blocks.back();
            want_header = true;
            continue;
        }
        if (current) {
            if (want_header) {
                current->header = split(line);
                want_header = false;
            } else {
                current->rows.push_back(split(line));
            }
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) {
            throw UsageError("report: malformed line '" + line + "'");
        }
        rep.fields.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return rep;
}

/// Writes text to path, or to `fallback` when path is empty or "-".
inline void write_output(const std::string& path, const std::string& text, std::ostream& fallback)
{
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

} // namespace magzoll
