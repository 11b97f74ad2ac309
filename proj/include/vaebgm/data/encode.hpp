#ifndef VAEBGM_DATA_ENCODE_HPP
#define VAEBGM_DATA_ENCODE_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/linalg.hpp"
#include "vaebgm/core/random.hpp"
#include "vaebgm/core/text.hpp"
#include "vaebgm/data/schema.hpp"
#include "vaebgm/data/table.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vaebgm::data {

/// Encoded table: standardized numerics, {0,1} binaries, one-hot categoricals.
struct DataMatrix {
    Dense2D values;
    std::shared_ptr<const TableSchema> schema;

    [[nodiscard]] std::size_t row_count() const { return static_cast<std::size_t>(values.rows()); }
};

namespace detail {

inline double parse_numeric_cell(const std::string &cell, const ColumnSpec &c, std::size_t row) {
    const auto v = parse_double(cell);
    if (!v) {
        throw InputError("column '" + c.name + "', row " + std::to_string(row + 1) + ": non-numeric value '" + cell + "'");
    }
    if (!std::isfinite(*v)) {
        throw InputError("column '" + c.name + "', row " + std::to_string(row + 1) + ": non-finite value");
    }
    return *v;
}

inline std::vector<std::size_t> map_columns(const RawTable &raw, const TableSchema &schema) {
    if (raw.column_count() != schema.columns.size()) {
        throw ArtifactMismatch("table has " + std::to_string(raw.column_count()) + " columns, schema expects " +
                               std::to_string(schema.columns.size()));
    }
    std::vector<std::size_t> idx;
    for (const auto &c : schema.columns) {
        const auto j = raw.column_index(c.name);
        if (j < 0) throw ArtifactMismatch("table is missing schema column '" + c.name + "'");
        idx.push_back(static_cast<std::size_t>(j));
    }
    return idx;
}

}  // namespace detail

/// Encodes a table under an already fitted schema. Unseen categorical levels
/// are an error.
inline DataMatrix encode(const RawTable &raw, std::shared_ptr<const TableSchema> schema) {
    const auto cols = detail::map_columns(raw, *schema);
    const auto offsets = schema->encoded_offsets();
    DataMatrix out{Dense2D::Zero(static_cast<Index>(raw.row_count()), static_cast<Index>(schema->encoded_dim())), schema};
    for (std::size_t i = 0; i < raw.row_count(); ++i) {
        const auto r = static_cast<Index>(i);
        for (std::size_t k = 0; k < schema->columns.size(); ++k) {
            const auto &c = schema->columns[k];
            const auto &cell = raw.rows[i][cols[k]];
            const auto off = static_cast<Index>(offsets[k]);
            if (is_numeric_kind(c.kind)) {
                out.values(r, off) = (detail::parse_numeric_cell(cell, c, i) - c.mean) / c.std;
            } else {
                const auto level = c.level_index(cell);
                if (level < 0) {
                    throw InputError("column '" + c.name + "', row " + std::to_string(i + 1) + ": unseen level '" + cell + "'");
                }
                if (c.kind == ColumnKind::binary) {
                    out.values(r, off) = static_cast<double>(level);
                } else {
                    out.values(r, off + level) = 1.0;
                }
            }
        }
    }
    return out;
}

/// Fits standardization parameters and observed ranges into `schema`, then
/// encodes. Degenerate (constant) numeric columns are rejected.
inline DataMatrix fit_encode(const RawTable &raw, TableSchema schema) {
    const auto cols = detail::map_columns(raw, schema);
    if (raw.row_count() == 0) throw InputError("empty table");
    for (std::size_t k = 0; k < schema.columns.size(); ++k) {
        auto &c = schema.columns[k];
        if (!is_numeric_kind(c.kind)) continue;
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        std::vector<double> vals(raw.row_count());
        for (std::size_t i = 0; i < raw.row_count(); ++i) {
            vals[i] = detail::parse_numeric_cell(raw.rows[i][cols[k]], c, i);
            sum += vals[i];
            lo = std::min(lo, vals[i]);
            hi = std::max(hi, vals[i]);
        }
        const double mean = sum / static_cast<double>(vals.size());
        double ss = 0.0;
        for (const double v : vals) ss += (v - mean) * (v - mean);
        c.mean = mean;
        c.std = std::sqrt(ss / static_cast<double>(vals.size()));
        c.min = lo;
        c.max = hi;
        if (!(c.std > 0.0)) throw InputError("constant column '" + c.name + "'");
    }
    schema.validate();
    return encode(raw, std::make_shared<const TableSchema>(std::move(schema)));
}

/// Formats a de-standardized numeric value according to the column kind.
inline std::string format_numeric(const ColumnSpec &c, double raw_value) {
    if (c.kind == ColumnKind::count) {
        const double v = std::clamp(std::round(raw_value), c.min, c.max);
        return std::to_string(static_cast<long long>(v));
    }
    return format_double(raw_value);
}

/// Samples raw rows from decoder parameter rows (see DecoderOutput layout:
/// numeric (mean, logvar), binary logit, categorical logits).
inline RawTable inverse_transform(const Dense2D &params, const TableSchema &schema, Rng &rng) {
    if (static_cast<std::size_t>(params.cols()) != schema.param_dim()) {
        throw ShapeError("decoder parameter width " + std::to_string(params.cols()) + " does not match schema layout " +
                         std::to_string(schema.param_dim()));
    }
    const auto offsets = schema.param_offsets();
    RawTable out;
    out.header = schema.column_names();
    out.rows.reserve(static_cast<std::size_t>(params.rows()));
    std::vector<double> probs;
    for (Index i = 0; i < params.rows(); ++i) {
        std::vector<std::string> row;
        row.reserve(schema.columns.size());
        for (std::size_t k = 0; k < schema.columns.size(); ++k) {
            const auto &c = schema.columns[k];
            const auto off = static_cast<Index>(offsets[k]);
            if (is_numeric_kind(c.kind)) {
                const double mean = params(i, off);
                const double logvar = params(i, off + 1);
                if (!std::isfinite(mean) || std::isnan(logvar) || logvar == std::numeric_limits<double>::infinity()) {
                    throw ShapeError("non-finite head parameters for column '" + c.name + "'");
                }
                const double sigma = std::exp(0.5 * logvar);
                const double draw = standard_normal(rng);
                const double z = sigma > 0.0 ? mean + sigma * draw : mean;
                row.push_back(format_numeric(c, z * c.std + c.mean));
            } else if (c.kind == ColumnKind::binary) {
                const double logit = params(i, off);
                if (std::isnan(logit)) throw ShapeError("non-finite head parameters for column '" + c.name + "'");
                const double p = 1.0 / (1.0 + std::exp(-logit));
                row.push_back(c.levels[uniform01(rng) < p ? 1 : 0]);
            } else {
                const auto n = static_cast<Index>(c.levels.size());
                const auto logits = params.row(i).segment(off, n);
                if (!logits.allFinite()) throw ShapeError("non-finite head parameters for column '" + c.name + "'");
                const double mx = logits.maxCoeff();
                probs.assign(c.levels.size(), 0.0);
                double total = 0.0;
                for (Index l = 0; l < n; ++l) {
                    probs[static_cast<std::size_t>(l)] = std::exp(logits(l) - mx);
                    total += probs[static_cast<std::size_t>(l)];
                }
                double u = uniform01(rng) * total;
                std::size_t pick = c.levels.size() - 1;
                for (std::size_t l = 0; l < probs.size(); ++l) {
                    if (u < probs[l]) {
                        pick = l;
                        break;
                    }
                    u -= probs[l];
                }
                row.push_back(c.levels[pick]);
            }
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// Deterministic decode of encoded rows: exact de-standardization, binary
/// threshold at 0.5 and categorical argmax.
inline RawTable decode_encoded(const Dense2D &encoded, const TableSchema &schema) {
    const auto offsets = schema.encoded_offsets();
    RawTable out;
    out.header = schema.column_names();
    for (Index i = 0; i < encoded.rows(); ++i) {
        std::vector<std::string> row;
        for (std::size_t k = 0; k < schema.columns.size(); ++k) {
            const auto &c = schema.columns[k];
            const auto off = static_cast<Index>(offsets[k]);
            if (is_numeric_kind(c.kind)) {
                row.push_back(format_numeric(c, encoded(i, off) * c.std + c.mean));
            } else if (c.kind == ColumnKind::binary) {
                row.push_back(c.levels[encoded(i, off) >= 0.5 ? 1 : 0]);
            } else {
                Index best = 0;
                encoded.row(i).segment(off, static_cast<Index>(c.levels.size())).maxCoeff(&best);
                row.push_back(c.levels[static_cast<std::size_t>(best)]);
            }
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// Checks one raw row against the schema. Returns a diagnostic or nullopt.
inline std::optional<std::string> validate_row(const TableSchema &schema, const std::vector<std::string> &row) {
    if (row.size() != schema.columns.size()) return "wrong field count";
    for (std::size_t k = 0; k < row.size(); ++k) {
        const auto &c = schema.columns[k];
        if (is_discrete_kind(c.kind)) {
            if (c.level_index(row[k]) < 0) return "column '" + c.name + "': level '" + row[k] + "' not in level table";
        } else {
            const auto v = parse_double(row[k]);
            if (!v || !std::isfinite(*v)) return "column '" + c.name + "': not a finite number";
            if (c.kind == ColumnKind::count && (*v != std::floor(*v) || *v < c.min || *v > c.max)) {
                return "column '" + c.name + "': count outside observed range";
            }
        }
    }
    return std::nullopt;
}

/// Shuffled train/validation partition; |train| = round(ratio * N), kept in [1, N-1].
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double ratio,
                                                                                   std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("split ratio must lie in (0, 1)");
    if (n < 2) throw InputError("split needs at least 2 rows");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    auto rng = make_rng({seed, 0x5e11ULL});
    shuffle_in_place(perm, rng);
    auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> val(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    return {std::move(train), std::move(val)};
}

inline DataMatrix select_rows(const DataMatrix &m, const std::vector<std::size_t> &rows) {
    return DataMatrix{vaebgm::select_rows(m.values, rows), m.schema};
}

inline std::pair<DataMatrix, DataMatrix> split(const DataMatrix &m, double ratio, std::uint64_t seed) {
    const auto [train, val] = split_indices(m.row_count(), ratio, seed);
    return {select_rows(m, train), select_rows(m, val)};
}

}  // namespace vaebgm::data

#endif
