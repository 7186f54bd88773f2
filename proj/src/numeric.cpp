#include "hazardlab/numeric.hpp"

#include <Eigen/Dense>

namespace hazardlab {

LeastSquares least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
    if (rows.empty() || rows.size() != y.size()) throw std::invalid_argument("least_squares: row count mismatch");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(rows.front().size());
    if (n < k) throw std::invalid_argument("least_squares: fewer observations than coefficients");
    Eigen::MatrixXd design(n, k);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != k) throw std::invalid_argument("least_squares: ragged rows");
        for (Eigen::Index j = 0; j < k; ++j) design(i, j) = rows[i][j];
        rhs(i) = y[i];
    }
    const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd resid = rhs - design * beta;
    const double mean = rhs.mean();
    const double ss_tot = (rhs.array() - mean).square().sum();
    const double ss_res = resid.squaredNorm();
    double r2 = 1.0;
    if (ss_tot > 1e-300 * static_cast<double>(n))
        r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    else if (ss_res > 1e-24 * static_cast<double>(n) * std::max(1.0, mean * mean))
        r2 = 0.0;
    return {std::vector<double>(beta.data(), beta.data() + beta.size()), r2};
}

}  // namespace hazardlab
