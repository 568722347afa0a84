#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace foliage {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

inline Vector to_vector(const std::vector<double>& p) {
    return Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
}

inline std::vector<double> to_std(const Vector& v) {
    return {v.data(), v.data() + v.size()};
}

/// Operator norm (largest singular value).
inline double opnorm(const Matrix& a) {
    return a.jacobiSvd().singularValues()(0);
}

inline double min_eigenvalue_sym(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    return es.eigenvalues().minCoeff();
}

inline bool is_spd(const Matrix& a, double sym_tol = 1e-12) {
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > sym_tol) return false;
    return min_eigenvalue_sym(a) > 0.0;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Quantized key for tolerance-based deduplication of matrices/points.
inline std::vector<int64_t> quantize(const double* data, size_t n, double tol) {
    std::vector<int64_t> key(n);
    for (size_t i = 0; i < n; ++i) key[i] = static_cast<int64_t>(std::llround(data[i] / tol));
    return key;
}

inline std::vector<int64_t> quantize(const Matrix& m, double tol) {
    return quantize(m.data(), static_cast<size_t>(m.size()), tol);
}

inline std::vector<int64_t> quantize(const std::vector<double>& p, double tol) {
    return quantize(p.data(), p.size(), tol);
}

/// 2x2 rotation by angle t.
inline Matrix rotation2(double t) {
    Matrix r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
}

}  // namespace foliage
