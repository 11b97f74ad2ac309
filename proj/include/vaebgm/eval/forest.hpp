#ifndef VAEBGM_EVAL_FOREST_HPP
#define VAEBGM_EVAL_FOREST_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/linalg.hpp"
#include "vaebgm/core/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace vaebgm::eval {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 0;           // 0: unlimited
    int features_per_split = 0;  // 0: ceil(sqrt(D))
    int min_samples_leaf = 1;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw InputError("forest: n_trees must be >= 1");
        if (max_depth < 0) throw InputError("forest: max_depth must be >= 0");
        if (features_per_split < 0) throw InputError("forest: features_per_split must be >= 0");
        if (min_samples_leaf < 1) throw InputError("forest: min_samples_leaf must be >= 1");
    }
};

/// Maps each feature to at most 255 ordered bins. Features with few distinct
/// values keep one bin per value; others use quantile edges.
class FeatureBinner {
  public:
    static constexpr int kMaxBins = 255;

    FeatureBinner() = default;

    explicit FeatureBinner(const Dense2D &x) {
        upper_.resize(static_cast<std::size_t>(x.cols()));
        std::vector<double> col(static_cast<std::size_t>(x.rows()));
        for (Index j = 0; j < x.cols(); ++j) {
            for (Index i = 0; i < x.rows(); ++i) col[static_cast<std::size_t>(i)] = x(i, j);
            std::sort(col.begin(), col.end());
            std::vector<double> distinct;
            for (double v : col) {
                if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
            }
            auto &edges = upper_[static_cast<std::size_t>(j)];
            if (static_cast<int>(distinct.size()) <= kMaxBins) {
                // Boundaries halfway between consecutive distinct values.
                for (std::size_t k = 0; k + 1 < distinct.size(); ++k) edges.push_back(0.5 * (distinct[k] + distinct[k + 1]));
            } else {
                for (int b = 1; b < kMaxBins; ++b) {
                    const auto pos = static_cast<std::size_t>(static_cast<double>(b) / kMaxBins * static_cast<double>(col.size() - 1));
                    const double e = col[pos];
                    if (edges.empty() || e > edges.back()) edges.push_back(e);
                }
            }
        }
    }

    [[nodiscard]] Index features() const { return static_cast<Index>(upper_.size()); }
    [[nodiscard]] int bins(Index j) const { return static_cast<int>(upper_[static_cast<std::size_t>(j)].size()) + 1; }

    /// Bin of value v for feature j: the number of edges strictly below v.
    [[nodiscard]] std::uint8_t bin(Index j, double v) const {
        const auto &e = upper_[static_cast<std::size_t>(j)];
        return static_cast<std::uint8_t>(std::lower_bound(e.begin(), e.end(), v) - e.begin());
    }

    /// Column-major bin codes.
    [[nodiscard]] std::vector<std::uint8_t> transform(const Dense2D &x) const {
        if (x.cols() != features()) throw ShapeError("forest: feature count differs from the training data");
        std::vector<std::uint8_t> out(static_cast<std::size_t>(x.size()));
        for (Index j = 0; j < x.cols(); ++j) {
            for (Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(j * x.rows() + i)] = bin(j, x(i, j));
        }
        return out;
    }

  private:
    std::vector<std::vector<double>> upper_;
};

/// Binary-split classification tree over binned features. Internal nodes
/// send bin <= threshold left.
class DecisionTree {
  public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        int threshold = 0;
        int left = -1;
        int right = -1;
        std::vector<double> distribution;  // leaf class frequencies, sums to 1
    };

    [[nodiscard]] const std::vector<Node> &nodes() const { return nodes_; }
    [[nodiscard]] int depth() const { return depth_; }

    /// Grows the tree on rows with positive weight (bootstrap multiplicities).
    void fit(const std::vector<std::uint8_t> &bins, const FeatureBinner &binner, Index n_rows, const std::vector<int> &labels,
             int n_classes, const std::vector<double> &weights, const ForestConfig &cfg, int features_per_split, Rng &rng) {
        nodes_.clear();
        depth_ = 0;
        bins_ = &bins;
        binner_ = &binner;
        n_rows_ = n_rows;
        labels_ = &labels;
        weights_ = &weights;
        n_classes_ = n_classes;
        cfg_ = &cfg;
        mtry_ = features_per_split;
        std::vector<Index> idx;
        for (Index i = 0; i < n_rows; ++i) {
            if (weights[static_cast<std::size_t>(i)] > 0.0) idx.push_back(i);
        }
        feature_order_.resize(static_cast<std::size_t>(binner.features()));
        std::iota(feature_order_.begin(), feature_order_.end(), 0);
        build(idx, 0, static_cast<Index>(idx.size()), 0, rng);
    }

    /// Leaf distribution reached by one binned row (column-major storage).
    [[nodiscard]] const std::vector<double> &leaf(const std::vector<std::uint8_t> &bins, Index n_rows, Index row) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const auto &nd = nodes_[static_cast<std::size_t>(node)];
            const int b = bins[static_cast<std::size_t>(nd.feature * n_rows + row)];
            node = b <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(node)].distribution;
    }

  private:
    struct Split {
        int feature = -1;
        int threshold = 0;
        double impurity = 0.0;
    };

    [[nodiscard]] std::uint8_t code(Index feature, Index row) const { return (*bins_)[static_cast<std::size_t>(feature * n_rows_ + row)]; }

    static double gini(const std::vector<double> &counts, double total) {
        if (total <= 0.0) return 0.0;
        double s = 0.0;
        for (double c : counts) s += c * c;
        return 1.0 - s / (total * total);
    }

    int make_leaf(const std::vector<double> &counts, double total) {
        Node leaf;
        leaf.distribution.resize(counts.size());
        for (std::size_t c = 0; c < counts.size(); ++c) leaf.distribution[c] = counts[c] / total;
        nodes_.push_back(std::move(leaf));
        return static_cast<int>(nodes_.size()) - 1;
    }

    Split best_split(const std::vector<Index> &idx, Index begin, Index end, const std::vector<double> &counts, double total, Rng &rng) {
        Split best;
        double best_score = gini(counts, total) * total - 1e-12;
        const auto nf = static_cast<Index>(feature_order_.size());
        const auto k = static_cast<std::size_t>(n_classes_);
        std::vector<double> hist;
        std::vector<double> left(k);
        std::vector<double> bin_total;
        int evaluated = 0;
        // Partial Fisher-Yates: features are drawn without replacement until
        // `mtry_` non-constant ones have been examined.
        for (Index f = 0; f < nf && evaluated < mtry_; ++f) {
            const auto pick = f + static_cast<Index>(uniform_index(rng, static_cast<std::size_t>(nf - f)));
            std::swap(feature_order_[static_cast<std::size_t>(f)], feature_order_[static_cast<std::size_t>(pick)]);
            const Index feat = feature_order_[static_cast<std::size_t>(f)];
            const int nb = binner_->bins(feat);
            if (nb < 2) continue;
            hist.assign(static_cast<std::size_t>(nb) * k, 0.0);
            bin_total.assign(static_cast<std::size_t>(nb), 0.0);
            int lo = nb, hi = -1;
            for (Index p = begin; p < end; ++p) {
                const Index row = idx[static_cast<std::size_t>(p)];
                const int b = code(feat, row);
                const double w = (*weights_)[static_cast<std::size_t>(row)];
                hist[static_cast<std::size_t>(b) * k + static_cast<std::size_t>((*labels_)[static_cast<std::size_t>(row)])] += w;
                bin_total[static_cast<std::size_t>(b)] += w;
                lo = std::min(lo, b);
                hi = std::max(hi, b);
            }
            if (lo == hi) continue;  // constant within this node
            ++evaluated;
            std::fill(left.begin(), left.end(), 0.0);
            double left_total = 0.0;
            for (int b = lo; b < hi; ++b) {
                if (bin_total[static_cast<std::size_t>(b)] == 0.0) continue;
                for (std::size_t c = 0; c < k; ++c) left[c] += hist[static_cast<std::size_t>(b) * k + c];
                left_total += bin_total[static_cast<std::size_t>(b)];
                const double right_total = total - left_total;
                if (left_total < cfg_->min_samples_leaf || right_total < cfg_->min_samples_leaf) continue;
                double sl = 0.0, sr = 0.0;
                for (std::size_t c = 0; c < k; ++c) {
                    sl += left[c] * left[c];
                    const double r = counts[c] - left[c];
                    sr += r * r;
                }
                // Weighted child impurity: n_l * gini_l + n_r * gini_r.
                const double score = (left_total - sl / left_total) + (right_total - sr / right_total);
                if (score < best_score) {
                    best_score = score;
                    best.feature = static_cast<int>(feat);
                    best.threshold = b;
                    best.impurity = score;
                }
            }
        }
        return best;
    }

    int build(std::vector<Index> &idx, Index begin, Index end, int depth, Rng &rng) {
        depth_ = std::max(depth_, depth);
        std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
        double total = 0.0;
        for (Index p = begin; p < end; ++p) {
            const Index row = idx[static_cast<std::size_t>(p)];
            const double w = (*weights_)[static_cast<std::size_t>(row)];
            counts[static_cast<std::size_t>((*labels_)[static_cast<std::size_t>(row)])] += w;
            total += w;
        }
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        const bool depth_capped = cfg_->max_depth > 0 && depth >= cfg_->max_depth;
        if (pure || depth_capped || total < 2.0 * cfg_->min_samples_leaf) return make_leaf(counts, total);
        const Split s = best_split(idx, begin, end, counts, total, rng);
        if (s.feature < 0) return make_leaf(counts, total);
        const auto mid_it = std::partition(idx.begin() + begin, idx.begin() + end,
                                           [&](Index row) { return code(s.feature, row) <= s.threshold; });
        const auto mid = static_cast<Index>(mid_it - idx.begin());
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{s.feature, s.threshold, -1, -1, {}});
        const int l = build(idx, begin, mid, depth + 1, rng);
        const int r = build(idx, mid, end, depth + 1, rng);
        nodes_[static_cast<std::size_t>(self)].left = l;
        nodes_[static_cast<std::size_t>(self)].right = r;
        return self;
    }

    std::vector<Node> nodes_;
    int depth_ = 0;
    const std::vector<std::uint8_t> *bins_ = nullptr;
    const FeatureBinner *binner_ = nullptr;
    Index n_rows_ = 0;
    const std::vector<int> *labels_ = nullptr;
    const std::vector<double> *weights_ = nullptr;
    int n_classes_ = 0;
    const ForestConfig *cfg_ = nullptr;
    int mtry_ = 1;
    std::vector<Index> feature_order_;
};

/// Bagged Gini trees with soft voting.
class RandomForest {
  public:
    void fit(const Dense2D &x, const std::vector<int> &labels, const ForestConfig &cfg) {
        cfg.validate();
        if (static_cast<Index>(labels.size()) != x.rows()) throw ShapeError("forest: label count differs from row count");
        if (x.rows() == 0) throw InputError("forest: empty training set");
        n_classes_ = *std::max_element(labels.begin(), labels.end()) + 1;
        if (*std::min_element(labels.begin(), labels.end()) < 0) throw InputError("forest: labels must be >= 0");
        std::vector<int> seen(static_cast<std::size_t>(n_classes_), 0);
        for (int l : labels) seen[static_cast<std::size_t>(l)] = 1;
        if (std::accumulate(seen.begin(), seen.end(), 0) < 2) throw InputError("forest: training labels contain a single class");
        binner_ = FeatureBinner(x);
        const auto bins = binner_.transform(x);
        const int mtry = cfg.features_per_split > 0 ? std::min<int>(cfg.features_per_split, static_cast<int>(x.cols()))
                                                     : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
        trees_.assign(static_cast<std::size_t>(cfg.n_trees), DecisionTree{});
        const auto n = static_cast<std::size_t>(x.rows());
        std::vector<double> weights(n);
        for (int t = 0; t < cfg.n_trees; ++t) {
            auto rng = make_rng({cfg.seed, static_cast<std::uint64_t>(t), 0xf0ULL});
            if (cfg.bootstrap) {
                std::fill(weights.begin(), weights.end(), 0.0);
                for (std::size_t i = 0; i < n; ++i) weights[uniform_index(rng, n)] += 1.0;
            } else {
                std::fill(weights.begin(), weights.end(), 1.0);
            }
            trees_[static_cast<std::size_t>(t)].fit(bins, binner_, x.rows(), labels, n_classes_, weights, cfg, mtry, rng);
        }
    }

    [[nodiscard]] int classes() const { return n_classes_; }
    [[nodiscard]] const std::vector<DecisionTree> &trees() const { return trees_; }

    /// Mean of the trees' leaf distributions, one row per input row.
    [[nodiscard]] Dense2D predict_proba(const Dense2D &x) const {
        const auto bins = binner_.transform(x);
        Dense2D p = Dense2D::Zero(x.rows(), n_classes_);
        for (const auto &tree : trees_) {
            for (Index i = 0; i < x.rows(); ++i) {
                const auto &d = tree.leaf(bins, x.rows(), i);
                for (int c = 0; c < n_classes_; ++c) p(i, c) += d[static_cast<std::size_t>(c)];
            }
        }
        return p / static_cast<double>(trees_.size());
    }

    /// Most probable class; ties resolve to the smaller label.
    [[nodiscard]] std::vector<int> predict(const Dense2D &x) const {
        const Dense2D p = predict_proba(x);
        std::vector<int> out(static_cast<std::size_t>(x.rows()));
        for (Index i = 0; i < x.rows(); ++i) {
            Index best = 0;
            p.row(i).maxCoeff(&best);
            out[static_cast<std::size_t>(i)] = static_cast<int>(best);
        }
        return out;
    }

  private:
    FeatureBinner binner_;
    std::vector<DecisionTree> trees_;
    int n_classes_ = 0;
};

inline double accuracy(const std::vector<int> &predicted, const std::vector<int> &truth) {
    if (predicted.size() != truth.size() || truth.empty()) throw ShapeError("accuracy: size mismatch or empty input");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace vaebgm::eval

#endif
