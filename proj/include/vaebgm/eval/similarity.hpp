#ifndef VAEBGM_EVAL_SIMILARITY_HPP
#define VAEBGM_EVAL_SIMILARITY_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/data/encode.hpp"
#include "vaebgm/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace vaebgm::eval {

/// One column of a table viewed for similarity scoring: numeric values for
/// continuous/count columns, level codes for binary/categorical ones.
struct ColumnView {
    data::ColumnKind kind = data::ColumnKind::continuous;
    std::vector<double> values;
    std::vector<int> codes;
    int n_levels = 0;
};

inline bool same_schema(const data::DataMatrix &a, const data::DataMatrix &b) {
    return a.schema && b.schema && (a.schema == b.schema || a.schema->hash() == b.schema->hash());
}

inline void require_same_schema(const data::DataMatrix &a, const data::DataMatrix &b) {
    if (!same_schema(a, b)) throw ArtifactMismatch("real and synthetic tables were encoded under different schemas");
}

/// Extracts column k of an encoded matrix. Categorical codes are the argmax of
/// the one-hot block.
inline ColumnView column_view(const data::DataMatrix &m, std::size_t k) {
    const auto &c = m.schema->columns.at(k);
    const auto off = static_cast<Index>(m.schema->encoded_offsets()[k]);
    ColumnView v;
    v.kind = c.kind;
    const Index n = m.values.rows();
    if (data::is_numeric_kind(c.kind)) {
        v.values.resize(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) v.values[static_cast<std::size_t>(i)] = m.values(i, off);
        return v;
    }
    v.n_levels = static_cast<int>(c.levels.size());
    v.codes.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        int code = 0;
        if (c.kind == data::ColumnKind::binary) {
            code = m.values(i, off) > 0.5 ? 1 : 0;
        } else {
            Index best = 0;
            m.values.row(i).segment(off, static_cast<Index>(c.levels.size())).maxCoeff(&best);
            code = static_cast<int>(best);
        }
        v.codes[static_cast<std::size_t>(i)] = code;
    }
    return v;
}

inline std::vector<double> level_frequencies(const std::vector<int> &codes, int n_levels) {
    std::vector<double> f(static_cast<std::size_t>(n_levels), 0.0);
    for (int c : codes) f[static_cast<std::size_t>(c)] += 1.0;
    for (double &x : f) x /= static_cast<double>(codes.size());
    return f;
}

/// 1 - KS for numeric columns, 1 - total variation for discrete ones.
inline double column_shape_score(const ColumnView &real, const ColumnView &syn) {
    if (real.kind != syn.kind) throw ArtifactMismatch("column kinds differ");
    if (data::is_numeric_kind(real.kind)) {
        if (real.values.empty() || syn.values.empty()) throw InputError("column shape: empty column");
        return 1.0 - ks_statistic(real.values, syn.values);
    }
    if (real.codes.empty() || syn.codes.empty()) throw InputError("column shape: empty column");
    const int levels = std::max(real.n_levels, syn.n_levels);
    const auto fr = level_frequencies(real.codes, levels);
    const auto fs = level_frequencies(syn.codes, levels);
    double tv = 0.0;
    for (std::size_t l = 0; l < fr.size(); ++l) tv += std::abs(fr[l] - fs[l]);
    return std::clamp(1.0 - 0.5 * tv, 0.0, 1.0);
}

inline std::vector<double> column_shape_scores(const data::DataMatrix &real, const data::DataMatrix &syn) {
    require_same_schema(real, syn);
    std::vector<double> out;
    for (std::size_t k = 0; k < real.schema->columns.size(); ++k) {
        out.push_back(column_shape_score(column_view(real, k), column_view(syn, k)));
    }
    return out;
}

/// Pearson correlation; zero when either side has no variance.
inline double pearson(const std::vector<double> &x, const std::vector<double> &y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Cramér's V of two code vectors. Empty rows and columns of the contingency
/// table are dropped first.
inline double cramers_v(const std::vector<int> &a, int na, const std::vector<int> &b, int nb) {
    std::vector<double> table(static_cast<std::size_t>(na * nb), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) table[static_cast<std::size_t>(a[i] * nb + b[i])] += 1.0;
    std::vector<double> row(static_cast<std::size_t>(na), 0.0), col(static_cast<std::size_t>(nb), 0.0);
    for (int r = 0; r < na; ++r) {
        for (int c = 0; c < nb; ++c) {
            row[static_cast<std::size_t>(r)] += table[static_cast<std::size_t>(r * nb + c)];
            col[static_cast<std::size_t>(c)] += table[static_cast<std::size_t>(r * nb + c)];
        }
    }
    const auto live_r = std::count_if(row.begin(), row.end(), [](double v) { return v > 0.0; });
    const auto live_c = std::count_if(col.begin(), col.end(), [](double v) { return v > 0.0; });
    const auto k = std::min(live_r, live_c) - 1;
    if (k < 1) return 0.0;
    const double n = static_cast<double>(a.size());
    double chi2 = 0.0;
    for (int r = 0; r < na; ++r) {
        if (row[static_cast<std::size_t>(r)] == 0.0) continue;
        for (int c = 0; c < nb; ++c) {
            if (col[static_cast<std::size_t>(c)] == 0.0) continue;
            const double e = row[static_cast<std::size_t>(r)] * col[static_cast<std::size_t>(c)] / n;
            const double d = table[static_cast<std::size_t>(r * nb + c)] - e;
            chi2 += d * d / e;
        }
    }
    return std::clamp(std::sqrt(chi2 / (n * static_cast<double>(k))), 0.0, 1.0);
}

/// Interior decile edges of a sample (duplicates removed).
inline std::vector<double> decile_edges(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> edges;
    for (int q = 1; q < 10; ++q) {
        const auto pos = static_cast<std::size_t>(static_cast<double>(q) / 10.0 * static_cast<double>(v.size() - 1));
        if (edges.empty() || v[pos] > edges.back()) edges.push_back(v[pos]);
    }
    return edges;
}

inline std::vector<int> discretize(const std::vector<double> &v, const std::vector<double> &edges) {
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v[i]) - edges.begin());
    }
    return out;
}

struct PairScore {
    std::string first;
    std::string second;
    std::string statistic;  // pearson or cramers_v
    double real_value = 0.0;
    double syn_value = 0.0;
    double score = 1.0;
};

/// Similarity of every unordered column pair. Numeric partners of a discrete
/// column are cut at the real column's deciles on both sides.
inline std::vector<PairScore> pair_trend_scores(const data::DataMatrix &real, const data::DataMatrix &syn) {
    require_same_schema(real, syn);
    const auto &cols = real.schema->columns;
    if (cols.size() < 2) throw InputError("pair trend: at least two columns are required");
    std::vector<ColumnView> rv, sv;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        rv.push_back(column_view(real, k));
        sv.push_back(column_view(syn, k));
    }
    struct Coded {
        std::vector<int> real, syn;
        int levels = 0;
    };
    auto coded = [&](std::size_t k) {
        if (!data::is_numeric_kind(cols[k].kind)) return Coded{rv[k].codes, sv[k].codes, rv[k].n_levels};
        const auto edges = decile_edges(rv[k].values);
        return Coded{discretize(rv[k].values, edges), discretize(sv[k].values, edges), static_cast<int>(edges.size()) + 1};
    };
    std::vector<PairScore> out;
    for (std::size_t a = 0; a < cols.size(); ++a) {
        for (std::size_t b = a + 1; b < cols.size(); ++b) {
            PairScore p{cols[a].name, cols[b].name, "", 0.0, 0.0, 1.0};
            if (data::is_numeric_kind(cols[a].kind) && data::is_numeric_kind(cols[b].kind)) {
                p.statistic = "pearson";
                p.real_value = pearson(rv[a].values, rv[b].values);
                p.syn_value = pearson(sv[a].values, sv[b].values);
                p.score = 1.0 - std::abs(p.real_value - p.syn_value) / 2.0;
            } else {
                const auto ca = coded(a);
                const auto cb = coded(b);
                p.statistic = "cramers_v";
                p.real_value = cramers_v(ca.real, ca.levels, cb.real, cb.levels);
                p.syn_value = cramers_v(ca.syn, ca.levels, cb.syn, cb.levels);
                p.score = 1.0 - std::abs(p.real_value - p.syn_value);
            }
            p.score = std::clamp(p.score, 0.0, 1.0);
            out.push_back(p);
        }
    }
    return out;
}

inline double pair_trend_score(const data::DataMatrix &real, const data::DataMatrix &syn) {
    const auto pairs = pair_trend_scores(real, syn);
    double s = 0.0;
    for (const auto &p : pairs) s += p.score;
    return s / static_cast<double>(pairs.size());
}

struct SimilarityResult {
    std::vector<std::string> columns;
    std::vector<double> column_shapes;
    double column_shape = 0.0;
    std::vector<PairScore> pairs;
    double pair_trend = 0.0;
    double overall = 0.0;
};

inline double combine_similarity(double mean_column_shape, double pair_trend) { return 0.5 * (mean_column_shape + pair_trend); }

inline SimilarityResult similarity(const data::DataMatrix &real, const data::DataMatrix &syn) {
    SimilarityResult r;
    r.columns = real.schema->column_names();
    r.column_shapes = column_shape_scores(real, syn);
    r.column_shape = mean_of(r.column_shapes);
    r.pairs = pair_trend_scores(real, syn);
    double s = 0.0;
    for (const auto &p : r.pairs) s += p.score;
    r.pair_trend = s / static_cast<double>(r.pairs.size());
    r.overall = combine_similarity(r.column_shape, r.pair_trend);
    return r;
}

inline double overall_similarity(const data::DataMatrix &real, const data::DataMatrix &syn) { return similarity(real, syn).overall; }

}  // namespace vaebgm::eval

#endif
