#pragma once

#include <Eigen/Dense>

namespace dyshift {

// M x 3 point matrix, meters, sensor frame.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vec3 = Eigen::RowVector3d;

inline Points gather_rows(const Points& m, const std::vector<int>& rows) {
    Points out(static_cast<Eigen::Index>(rows.size()), 3);
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

inline Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

} // namespace dyshift
