#pragma once

#include <sturmdisc/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace sturmdisc {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS
};

// Least-squares line v = slope * u + intercept.
inline LineFit line_fit(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size() || u.size() < 2) throw ValidationError("line fit needs at least two paired samples");
    const Eigen::Index n = Eigen::Index(u.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = u[i];
        A(i, 1) = 1.0;
        b(i) = v[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 2) throw ComputationError("line fit: degenerate abscissae");
    const Eigen::VectorXd x = qr.solve(b);
    return LineFit{x(0), x(1), std::sqrt((A * x - b).squaredNorm() / double(n))};
}

} // namespace sturmdisc
