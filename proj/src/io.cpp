#include "mim/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mim::io {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the header");
    rows.push_back(std::move(row));
}

std::string format_number(double v, int digits) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    std::string s(buf);
    // snprintf honours LC_NUMERIC; the CSV contract is a '.' decimal point.
    for (char& c : s)
        if (c == ',') c = '.';
    if (s == "-0") s = "0";
    return s;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::string render(const Cell& c, int digits) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d, digits);
    return csv_field(std::get<std::string>(c));
}

}  // namespace

void emit_csv(const Table& table, std::ostream& out, int digits) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_field(table.columns[i]);
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render(row[i], digits);
        out << '\n';
    }
}

nlohmann::ordered_json to_json(const Table& table, int digits) {
    auto doc = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            if (const auto* n = std::get_if<std::int64_t>(&c))
                obj[table.columns[i]] = *n;
            else if (const auto* d = std::get_if<double>(&c))
                obj[table.columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(std::strtod(format_number(*d, digits).c_str(), nullptr))
                                                          : nlohmann::ordered_json(nullptr);
            else
                obj[table.columns[i]] = std::get<std::string>(c);
        }
        doc.push_back(std::move(obj));
    }
    return doc;
}

void emit_json(const nlohmann::ordered_json& doc, std::ostream& out) { out << doc.dump(2) << '\n'; }

void write_text(const std::filesystem::path& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        fallback.flush();
        if (!fallback) throw IoError("failed writing output");
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("failed writing " + path.string());
}

Table read_csv(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        out.push_back(cur);
        return out;
    };
    Table t;
    std::string line;
    if (!std::getline(in, line)) return t;
    t.columns = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<Cell> row;
        for (auto& f : split(line)) row.emplace_back(std::move(f));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace mim::io
