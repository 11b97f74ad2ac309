#ifndef VAEBGM_DATA_SCHEMA_HPP
#define VAEBGM_DATA_SCHEMA_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/hash.hpp"
#include "vaebgm/core/kvfile.hpp"
#include "vaebgm/core/text.hpp"
#include "vaebgm/data/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace vaebgm::data {

enum class ColumnKind { continuous, binary, categorical, count };

inline std::string to_string(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::binary: return "binary";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::count: return "count";
    }
    return "?";
}

inline ColumnKind parse_column_kind(const std::string &s) {
    if (s == "continuous") return ColumnKind::continuous;
    if (s == "binary") return ColumnKind::binary;
    if (s == "categorical") return ColumnKind::categorical;
    if (s == "count") return ColumnKind::count;
    throw InputError("unknown column kind '" + s + "'");
}

inline bool is_numeric_kind(ColumnKind k) { return k == ColumnKind::continuous || k == ColumnKind::count; }
inline bool is_discrete_kind(ColumnKind k) { return k == ColumnKind::binary || k == ColumnKind::categorical; }

/// Per-column type plus fitted transform. Numeric kinds carry standardization
/// parameters and the observed range; discrete kinds carry the level table.
struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    double mean = 0.0;
    double std = 1.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> levels;

    /// Width in the encoded data matrix.
    [[nodiscard]] std::size_t encoded_width() const { return kind == ColumnKind::categorical ? levels.size() : 1; }

    /// Width of the decoder's parameter block for this column.
    [[nodiscard]] std::size_t param_width() const {
        switch (kind) {
        case ColumnKind::continuous:
        case ColumnKind::count: return 2;
        case ColumnKind::binary: return 1;
        case ColumnKind::categorical: return levels.size();
        }
        return 0;
    }

    [[nodiscard]] std::ptrdiff_t level_index(const std::string &label) const {
        const auto it = std::find(levels.begin(), levels.end(), label);
        return it == levels.end() ? -1 : it - levels.begin();
    }
};

struct SurvivalColumns {
    std::string time_column;
    std::string event_column;
};

class TableSchema {
  public:
    std::vector<ColumnSpec> columns;
    std::optional<SurvivalColumns> survival;
    std::optional<std::string> label;

    [[nodiscard]] std::size_t encoded_dim() const {
        std::size_t d = 0;
        for (const auto &c : columns) d += c.encoded_width();
        return d;
    }

    [[nodiscard]] std::size_t param_dim() const {
        std::size_t d = 0;
        for (const auto &c : columns) d += c.param_width();
        return d;
    }

    /// Start offset of each column inside an encoded row.
    [[nodiscard]] std::vector<std::size_t> encoded_offsets() const {
        std::vector<std::size_t> out;
        std::size_t off = 0;
        for (const auto &c : columns) {
            out.push_back(off);
            off += c.encoded_width();
        }
        return out;
    }

    /// Start offset of each column inside a decoder parameter row.
    [[nodiscard]] std::vector<std::size_t> param_offsets() const {
        std::vector<std::size_t> out;
        std::size_t off = 0;
        for (const auto &c : columns) {
            out.push_back(off);
            off += c.param_width();
        }
        return out;
    }

    [[nodiscard]] std::ptrdiff_t column_index(const std::string &name) const {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (columns[j].name == name) return static_cast<std::ptrdiff_t>(j);
        }
        return -1;
    }

    [[nodiscard]] const ColumnSpec &column(const std::string &name) const {
        const auto j = column_index(name);
        if (j < 0) throw InputError("unknown column '" + name + "'");
        return columns[static_cast<std::size_t>(j)];
    }

    [[nodiscard]] std::vector<std::string> column_names() const {
        std::vector<std::string> out;
        for (const auto &c : columns) out.push_back(c.name);
        return out;
    }

    /// Structural checks that do not need data: unique names, level tables,
    /// positive scales, survival and label designations.
    void validate() const {
        std::set<std::string> names;
        for (const auto &c : columns) {
            if (!names.insert(c.name).second) {
                throw InputError("duplicate column name '" + c.name + "'");
            }
            if (is_discrete_kind(c.kind)) {
                const std::set<std::string> uniq(c.levels.begin(), c.levels.end());
                if (uniq.size() != c.levels.size()) {
                    throw InputError("column '" + c.name + "': duplicate levels");
                }
                if (c.levels.size() < 2) {
                    throw InputError("column '" + c.name + "': needs at least 2 levels");
                }
                if (c.kind == ColumnKind::binary && c.levels.size() != 2) {
                    throw InputError("column '" + c.name + "': binary column needs exactly 2 levels");
                }
            } else if (!(c.std > 0.0) || !std::isfinite(c.std) || !std::isfinite(c.mean)) {
                throw InputError("column '" + c.name + "': invalid standardization (std must be > 0)");
            }
        }
        if (survival) {
            const auto &t = column(survival->time_column);
            const auto &e = column(survival->event_column);
            if (!is_numeric_kind(t.kind)) {
                throw InputError("survival time column '" + t.name + "' must be continuous or count");
            }
            if (t.min < 0.0) {
                throw InputError("survival time column '" + t.name + "' has negative values");
            }
            if (e.kind != ColumnKind::binary) {
                throw InputError("survival event column '" + e.name + "' must be binary");
            }
        }
        if (label) {
            const auto &l = column(*label);
            if (!is_discrete_kind(l.kind)) {
                throw InputError("label column '" + l.name + "' must be binary or categorical");
            }
        }
    }

    [[nodiscard]] KeyValueFile to_kv() const {
        KeyValueFile kv;
        kv.set("columns", std::to_string(columns.size()));
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto &c = columns[j];
            const std::string p = "column." + std::to_string(j) + ".";
            kv.set(p + "name", quote_list({c.name}));
            kv.set(p + "kind", to_string(c.kind));
            if (is_numeric_kind(c.kind)) {
                kv.set(p + "mean", format_double(c.mean));
                kv.set(p + "std", format_double(c.std));
                kv.set(p + "min", format_double(c.min));
                kv.set(p + "max", format_double(c.max));
            } else {
                kv.set(p + "levels", quote_list(c.levels));
            }
        }
        if (survival) {
            kv.set("survival.time", survival->time_column);
            kv.set("survival.event", survival->event_column);
        }
        if (label) {
            kv.set("label", *label);
        }
        return kv;
    }

    static TableSchema from_kv(const KeyValueFile &kv) {
        TableSchema s;
        const auto n = kv.require_int("columns");
        for (long long j = 0; j < n; ++j) {
            const std::string p = "column." + std::to_string(j) + ".";
            ColumnSpec c;
            const auto names = unquote_list(kv.require(p + "name"));
            if (names.size() != 1) throw InputError("bad column name entry " + p + "name");
            c.name = names.front();
            c.kind = parse_column_kind(kv.require(p + "kind"));
            if (is_numeric_kind(c.kind)) {
                c.mean = kv.require_double(p + "mean");
                c.std = kv.require_double(p + "std");
                c.min = kv.require_double(p + "min");
                c.max = kv.require_double(p + "max");
            } else {
                c.levels = unquote_list(kv.require(p + "levels"));
            }
            s.columns.push_back(std::move(c));
        }
        if (kv.contains("survival.time")) {
            s.survival = SurvivalColumns{kv.require("survival.time"), kv.require("survival.event")};
        }
        if (kv.contains("label")) {
            s.label = kv.require("label");
        }
        s.validate();
        return s;
    }

    /// Fingerprint of the fitted schema; checkpoints and generated tables carry it.
    [[nodiscard]] std::string hash() const { return hash_hex(to_kv().str()); }

  private:
    // Always quoted so empty and whitespace-only labels survive the key/value trim.
    static std::string quote_list(const std::vector<std::string> &items) {
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i > 0) out.push_back(',');
            out.push_back('"');
            for (const char ch : items[i]) {
                if (ch == '"') out.push_back('"');
                out.push_back(ch);
            }
            out.push_back('"');
        }
        return out;
    }

    static std::vector<std::string> unquote_list(const std::string &s) { return detail::split_record(s, ',', 1); }
};

/// User-supplied overrides read from the schema sidecar file.
///
/// Sidecar grammar (one `key = value` per line, '#' starts a comment line):
///
///     kind.<column>         = continuous | binary | categorical | count
///     survival.time         = <column>
///     survival.event        = <column>
///     label                 = <column>
///     categorical_threshold = <integer, default 20>
///     expect.columns        = <comma-separated header the table must match>
struct SchemaHints {
    std::map<std::string, ColumnKind> kinds;
    std::optional<SurvivalColumns> survival;
    std::optional<std::string> label;
    std::size_t categorical_threshold = 20;
    std::optional<std::vector<std::string>> expected_columns;

    static SchemaHints from_kv(const KeyValueFile &kv) {
        SchemaHints h;
        for (const auto &[key, value] : kv.entries()) {
            if (key.rfind("kind.", 0) == 0) {
                h.kinds[key.substr(5)] = parse_column_kind(value);
            } else if (key == "survival.time" || key == "survival.event") {
                if (!h.survival) h.survival = SurvivalColumns{};
                (key == "survival.time" ? h.survival->time_column : h.survival->event_column) = value;
            } else if (key == "label") {
                h.label = value;
            } else if (key == "categorical_threshold") {
                const auto v = parse_int(value);
                if (!v || *v < 1) throw InputError("categorical_threshold must be a positive integer");
                h.categorical_threshold = static_cast<std::size_t>(*v);
            } else if (key == "expect.columns") {
                auto cols = split_string(value, ',');
                for (auto &c : cols) c = std::string(trim(c));
                h.expected_columns = std::move(cols);
            } else {
                throw InputError("schema sidecar: unknown key '" + key + "'");
            }
        }
        if (h.survival && (h.survival->time_column.empty() || h.survival->event_column.empty())) {
            throw InputError("schema sidecar: survival.time and survival.event must both be set");
        }
        return h;
    }

    static SchemaHints load(const std::filesystem::path &path) { return from_kv(KeyValueFile::load(path)); }
};

namespace detail {

inline std::vector<std::string> sorted_levels(const std::set<std::string> &distinct) {
    std::vector<std::string> levels(distinct.begin(), distinct.end());
    const bool numeric = std::all_of(levels.begin(), levels.end(), [](const auto &s) { return parse_double(s).has_value(); });
    if (numeric) {
        std::stable_sort(levels.begin(), levels.end(),
                         [](const auto &a, const auto &b) { return *parse_double(a) < *parse_double(b); });
    }
    return levels;
}

}  // namespace detail

/// Assigns a kind to every column. Exactly two distinct values gives binary;
/// all-integer columns with at most `categorical_threshold` distinct values give
/// categorical, other all-integer columns give count; remaining numeric columns
/// are continuous and non-numeric ones categorical. Hints take precedence.
/// Standardization parameters are left at identity until `fit_encode`.
inline TableSchema infer_schema(const RawTable &raw, const SchemaHints &hints = {}) {
    if (raw.column_count() == 0 || raw.row_count() == 0) {
        throw InputError("empty table");
    }
    if (hints.expected_columns && *hints.expected_columns != raw.header) {
        throw InputError("table header does not match the expected column list of the schema file");
    }
    for (const auto &[name, kind] : hints.kinds) {
        if (raw.column_index(name) < 0) throw InputError("schema hint references unknown column '" + name + "'");
    }
    TableSchema schema;
    for (std::size_t j = 0; j < raw.column_count(); ++j) {
        const auto &name = raw.header[j];
        std::set<std::string> distinct;
        std::size_t numeric = 0;
        bool all_integer = true;
        std::optional<std::size_t> first_non_numeric;
        for (std::size_t i = 0; i < raw.row_count(); ++i) {
            const auto &v = raw.rows[i][j];
            distinct.insert(v);
            if (const auto d = parse_double(v)) {
                ++numeric;
                if (!std::isfinite(*d)) {
                    throw InputError("column '" + name + "', row " + std::to_string(i + 1) + ": non-finite value");
                }
                if (*d != std::floor(*d)) all_integer = false;
            } else {
                all_integer = false;
                if (!first_non_numeric) first_non_numeric = i;
            }
        }
        if (distinct.size() < 2) {
            throw InputError("constant column '" + name + "'");
        }
        const bool all_numeric = numeric == raw.row_count();
        if (numeric > 0 && !all_numeric && distinct.size() > 2 && !hints.kinds.count(name)) {
            throw InputError("column '" + name + "', row " + std::to_string(*first_non_numeric + 1) +
                             ": non-numeric value '" + raw.rows[*first_non_numeric][j] + "' in a numeric column");
        }
        ColumnSpec c;
        c.name = name;
        if (const auto it = hints.kinds.find(name); it != hints.kinds.end()) {
            c.kind = it->second;
        } else if (distinct.size() == 2) {
            c.kind = ColumnKind::binary;
        } else if (all_numeric && all_integer) {
            c.kind = distinct.size() <= hints.categorical_threshold ? ColumnKind::categorical : ColumnKind::count;
        } else if (all_numeric) {
            c.kind = ColumnKind::continuous;
        } else {
            c.kind = ColumnKind::categorical;
        }
        if (is_numeric_kind(c.kind) && !all_numeric) {
            for (std::size_t i = 0; i < raw.row_count(); ++i) {
                if (!parse_double(raw.rows[i][j])) {
                    throw InputError("column '" + name + "', row " + std::to_string(i + 1) + ": non-numeric value '" +
                                     raw.rows[i][j] + "' in a numeric column");
                }
            }
        }
        if (c.kind == ColumnKind::binary && distinct.size() != 2) {
            throw InputError("column '" + name + "' declared binary but has " + std::to_string(distinct.size()) +
                             " distinct values");
        }
        if (is_discrete_kind(c.kind)) {
            c.levels = detail::sorted_levels(distinct);
        }
        schema.columns.push_back(std::move(c));
    }
    if (hints.survival) {
        for (const auto *col : {&hints.survival->time_column, &hints.survival->event_column}) {
            if (raw.column_index(*col) < 0) throw InputError("survival column '" + *col + "' not in table");
        }
        // An integer time column with few distinct values would otherwise be
        // inferred categorical; survival times are always numeric.
        auto &t = schema.columns[static_cast<std::size_t>(raw.column_index(hints.survival->time_column))];
        if (!hints.kinds.count(t.name) && t.kind != ColumnKind::continuous && t.kind != ColumnKind::count) {
            const bool numeric = std::all_of(t.levels.begin(), t.levels.end(), [](const auto &s) { return parse_double(s).has_value(); });
            if (numeric) {
                const bool integer = std::all_of(t.levels.begin(), t.levels.end(), [](const auto &s) {
                    const double d = *parse_double(s);
                    return d == std::floor(d);
                });
                t.kind = integer ? ColumnKind::count : ColumnKind::continuous;
                t.levels.clear();
            }
        }
        schema.survival = hints.survival;
    }
    if (hints.label) {
        if (raw.column_index(*hints.label) < 0) throw InputError("label column '" + *hints.label + "' not in table");
        schema.label = hints.label;
    }
    return schema;
}

}  // namespace vaebgm::data

#endif
