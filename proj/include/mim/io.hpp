#pragma once

// Deterministic CSV / JSON emission of result tables.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace mim::io {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

inline constexpr int kDefaultDigits = 9;

/// printf %.*g, locale-independent decimal point.
std::string format_number(double v, int digits = kDefaultDigits);

/// Header row, then one line per row; strings containing separators are quoted.
void emit_csv(const Table& table, std::ostream& out, int digits = kDefaultDigits);

/// Array of objects with keys in column order; doubles rounded to `digits`.
nlohmann::ordered_json to_json(const Table& table, int digits = kDefaultDigits);
void emit_json(const nlohmann::ordered_json& doc, std::ostream& out);

/// Writes to `path`, or to `fallback` when path is empty. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text, std::ostream& fallback);

/// Parses CSV produced by emit_csv back into header + string cells.
Table read_csv(std::istream& in);

}  // namespace mim::io
