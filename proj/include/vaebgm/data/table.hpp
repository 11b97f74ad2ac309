#ifndef VAEBGM_DATA_TABLE_HPP
#define VAEBGM_DATA_TABLE_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/text.hpp"

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace vaebgm::data {

/// A delimited text table held as strings, exactly as read.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t row_count() const { return rows.size(); }
    [[nodiscard]] std::size_t column_count() const { return header.size(); }

    [[nodiscard]] std::ptrdiff_t column_index(const std::string &name) const {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == name) {
                return static_cast<std::ptrdiff_t>(j);
            }
        }
        return -1;
    }
};

inline bool is_missing_token(std::string_view field) {
    return field.empty() || field == "?" || field == "NA" || field == "NaN" || field == "nan";
}

namespace detail {

// Splits one record; handles double-quoted fields with "" escapes.
inline std::vector<std::string> split_record(const std::string &line, char delim, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && trim(cur).empty()) {
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == delim) {
            fields.push_back(was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) {
        throw InputError("line " + std::to_string(line_no) + ": unterminated quoted field");
    }
    fields.push_back(was_quoted ? cur : std::string(trim(cur)));
    return fields;
}

inline bool needs_quoting(const std::string &field, char delim) {
    return field.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos ||
           (!field.empty() && (field.front() == ' ' || field.back() == ' '));
}

}  // namespace detail

struct ReadOptions {
    char delimiter = ',';
    /// Drop rows containing a missing token instead of failing.
    bool drop_missing = true;
};

/// Parses a header-first delimited table. Rows with missing values are dropped
/// and their count logged.
inline RawTable read_table(std::istream &in, const ReadOptions &opts = {}, const std::string &source = "<stream>") {
    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dropped = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
            line.erase(0, 3);  // UTF-8 BOM
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = detail::split_record(line, opts.delimiter, line_no);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw InputError(source + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        bool missing = false;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (is_missing_token(fields[j])) {
                if (!opts.drop_missing) {
                    throw InputError(source + ": line " + std::to_string(line_no) + ", column '" + table.header[j] +
                                     "': missing value");
                }
                missing = true;
            }
        }
        if (missing) {
            ++dropped;
            continue;
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) {
        throw InputError(source + ": empty table (no header)");
    }
    if (dropped > 0) {
        log_info(source + ": dropped " + std::to_string(dropped) + " rows with missing values");
    }
    return table;
}

inline RawTable read_table(const std::filesystem::path &path, const ReadOptions &opts = {}) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open table '" + path.string() + "'");
    }
    return read_table(in, opts, path.string());
}

inline void write_table(std::ostream &out, const RawTable &table, char delim = ',') {
    auto write_row = [&](const std::vector<std::string> &row) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0) {
                out << delim;
            }
            const auto &f = row[j];
            if (detail::needs_quoting(f, delim)) {
                out << '"';
                for (const char c : f) {
                    if (c == '"') {
                        out << '"';
                    }
                    out << c;
                }
                out << '"';
            } else {
                out << f;
            }
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto &row : table.rows) {
        write_row(row);
    }
}

inline void write_table(const std::filesystem::path &path, const RawTable &table, char delim = ',') {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write table '" + path.string() + "'");
    }
    write_table(out, table, delim);
}

}  // namespace vaebgm::data

#endif
