#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "rcm/errors.hpp"

namespace rcm::lab {

/// Text of a double in CSV output: `%.17g`, `nan` / `inf` / `-inf` for non-finite values.
inline std::string csv_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV table: a `# schema:` comment line, a header row, then data rows.
class CsvTable {
public:
    CsvTable(std::string schema, std::vector<std::string> columns) : schema_(std::move(schema)), columns_(std::move(columns)) {}

    class Row {
    public:
        Row& num(double v) { return cell(csv_number(v)); }
        Row& count(std::uint64_t v) { return cell(std::to_string(v)); }
        Row& text(std::string_view v) { return cell(quote(v)); }
        Row& flag(bool v) { return cell(v ? "1" : "0"); }
        Row& blank() { return cell(""); }

    private:
        friend class CsvTable;
        explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
        Row& cell(std::string v)
        {
            cells_.push_back(std::move(v));
            return *this;
        }
        static std::string quote(std::string_view v)
        {
            if (v.find_first_of(",\"\n") == std::string_view::npos) {
                return std::string(v);
            }
            std::string out = "\"";
            for (char c : v) {
                out += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            return out + "\"";
        }
        std::vector<std::string>& cells_;
    };

    Row add_row()
    {
        if (!rows_.empty() && rows_.back().size() != columns_.size()) {
            throw UsageError("CsvTable: row " + std::to_string(rows_.size()) + " has the wrong number of cells");
        }
        rows_.emplace_back();
        return Row(rows_.back());
    }

    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }
    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }

    [[nodiscard]] std::string str() const
    {
        if (!rows_.empty() && rows_.back().size() != columns_.size()) {
            throw UsageError("CsvTable: last row has the wrong number of cells");
        }
        std::string out = "# schema: " + schema_ + "\n";
        append_line(out, columns_);
        for (const auto& r : rows_) {
            append_line(out, r);
        }
        return out;
    }

private:
    static void append_line(std::string& out, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out += (i ? "," : "") + cells[i];
        }
        out += '\n';
    }

    std::string schema_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace rcm::lab
