#pragma once

#include "rankloss/types.hpp"

namespace rankloss {

/// Logistic value and derivative at one point.
struct SigmoidValue {
    double value;
    double derivative;
};

/// sigma_tau(u) = 1 / (1 + exp(-u/tau)) and its derivative value*(1-value)/tau.
///
/// Evaluated through exp(-|u|/tau) so the exponential can only underflow,
/// never overflow; saturated inputs return exact 0 or 1 with derivative 0.
SigmoidValue sigmoid(double u, Temperature tau);

/// Scale v to unit Euclidean norm. Throws ZeroVector for ||v|| < 1e-30.
Vector l2_normalize(const Vector& v);

/// Normalize every row of a batch. Throws ZeroVector on any degenerate row.
Matrix l2_normalize_rows(const Matrix& batch);

/// Pairwise dot products: entry (i,j) = A.row(i) . B.row(j).
///
/// Each entry is one contiguous dot with a fixed summation order, so the
/// result does not depend on how callers tile the rows.
Matrix similarity_matrix(const Matrix& A, const Matrix& B);

}  // namespace rankloss
