#pragma once

// Minimal CSV writer/reader pair. Numeric fields are printed with %.17g so a
// re-parse returns bitwise-identical doubles; fields never contain commas,
// quotes, or newlines, so no quoting layer is needed.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bullwhip {

[[nodiscard]] inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[nodiscard]] inline std::string csv_int(long long v) { return std::to_string(v); }

// Full-consumption double parse; empty or trailing garbage is an error.
[[nodiscard]] inline double csv_to_double(const std::string& field) {
    if (field.empty()) throw std::runtime_error("csv: empty numeric field");
    char* end = nullptr;
    const double x = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size())
        throw std::runtime_error("csv: bad numeric field '" + field + "'");
    return x;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("csv: no column named '" + name + "'");
    }
};

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
    auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::runtime_error("csv: row width does not match header");
        emit(row);
    }
    if (!out) throw std::runtime_error("csv: write failed for '" + path + "'");
}

namespace csv_detail {

[[nodiscard]] inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace csv_detail

[[nodiscard]] inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot open '" + path + "' for reading");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        auto fields = csv_detail::split_fields(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw std::runtime_error("csv: ragged row in '" + path + "'");
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw std::runtime_error("csv: '" + path + "' has no header");
    return table;
}

}  // namespace bullwhip
