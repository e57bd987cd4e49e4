#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace spinlab {

inline std::string format_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Rectangular numeric/text table with a JSON metadata block. CSV output is
/// a single '#'-prefixed metadata line, a header, then rows with numbers at
/// 12 significant digits; emission is deterministic for identical inputs.
struct ResultTable {
    using Cell = std::variant<double, std::string>;

    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::ordered_json metadata;

    void add_row(std::vector<Cell> cells) {
        if (cells.size() != columns.size())
            throw std::logic_error("ResultTable: row width mismatch");
        rows.push_back(std::move(cells));
    }

    static std::string cell_text(const Cell& c) {
        if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
        return std::get<std::string>(c);
    }

    void write_csv(std::ostream& os) const {
        os << "# " << metadata.dump() << "\n";
        for (size_t i = 0; i < columns.size(); ++i)
            os << columns[i] << (i + 1 < columns.size() ? "," : "");
        os << "\n";
        for (const auto& row : rows) {
            for (size_t i = 0; i < row.size(); ++i)
                os << cell_text(row[i]) << (i + 1 < row.size() ? "," : "");
            os << "\n";
        }
    }

    void write_json(std::ostream& os) const {
        nlohmann::ordered_json j;
        j["metadata"] = metadata;
        j["columns"] = columns;
        auto& out_rows = j["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json r = nlohmann::ordered_json::array();
            for (const auto& c : row) {
                if (std::holds_alternative<double>(c))
                    r.push_back(std::get<double>(c));
                else
                    r.push_back(std::get<std::string>(c));
            }
            out_rows.push_back(std::move(r));
        }
        os << j.dump(2) << "\n";
    }

    void write_file(const std::string& path, const std::string& format) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open output file: " + path);
        if (format == "json")
            write_json(os);
        else
            write_csv(os);
    }
};

} // namespace spinlab
