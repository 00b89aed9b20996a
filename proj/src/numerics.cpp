#include "rankloss/numerics.hpp"

#include <cmath>

namespace rankloss {

SigmoidValue sigmoid(double u, Temperature tau) {
    const double t = u / tau.tau;
    double value;
    if (t >= 0.0) {
        const double e = std::exp(-t);
        value = 1.0 / (1.0 + e);
    } else {
        const double e = std::exp(t);
        value = e / (1.0 + e);
    }
    const double derivative = value * (1.0 - value) / tau.tau;
    return {value, derivative};
}

Vector l2_normalize(const Vector& v) {
    const double norm = v.norm();
    if (norm < 1e-30) throw ZeroVector();
    return v / norm;
}

Matrix l2_normalize_rows(const Matrix& batch) {
    Matrix out(batch.rows(), batch.cols());
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        const double norm = batch.row(i).norm();
        if (norm < 1e-30) throw ZeroVector();
        out.row(i) = batch.row(i) / norm;
    }
    return out;
}

Matrix similarity_matrix(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols())
        throw DimensionMismatch("similarity_matrix: A has " + std::to_string(A.cols()) +
                                " cols, B has " + std::to_string(B.cols()));
    Matrix S(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            S(i, j) = A.row(i).dot(B.row(j));
        }
    }
    return S;
}

}  // namespace rankloss
