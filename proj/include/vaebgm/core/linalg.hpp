#ifndef VAEBGM_CORE_LINALG_HPP
#define VAEBGM_CORE_LINALG_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace vaebgm {

/// Row-major dense matrix; one observation per row throughout the library.
using Dense2D = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

inline bool all_finite(const Dense2D &m) { return m.allFinite(); }

inline Dense2D select_rows(const Dense2D &m, const std::vector<std::size_t> &rows) {
    Dense2D out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(rows[i]));
    }
    return out;
}

inline Dense2D vstack(const Dense2D &a, const Dense2D &b) {
    Dense2D out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

}  // namespace vaebgm

#endif
