#pragma once

#include <vector>

#include "rankloss/rng.hpp"
#include "rankloss/types.hpp"

namespace rankloss {

/// One virtual example: a convex mix of base rows i and j of the same class.
/// The mixed vector alpha*e_i + (1-alpha)*e_j is never materialized.
struct VirtualSpec {
    int i;
    int j;          // i < j
    double alpha;   // in (0, 1)
    int class_id;
};

/// Base batch plus its enumerated virtual examples.
struct ExtendedBatch {
    int base_size = 0;
    std::vector<VirtualSpec> virtuals;
    Labels labels;  // length base_size + virtuals.size()

    int total_size() const { return base_size + static_cast<int>(virtuals.size()); }
};

/// One VirtualSpec per unordered same-class pair, in (class, i, j) order,
/// with a fresh alpha ~ U(0,1) drawn per pair.
ExtendedBatch enumerate_virtual(const Labels& labels, Rng& rng);

/// Extend an MxM similarity matrix to (M+V)x(M+V) by mixing scalar
/// similarities: entry (a,b) = sum over parents of a and b of
/// coeff_a * coeff_b * base(parent_a, parent_b), where a real row is its own
/// parent with coefficient 1 and a virtual row has parents (i, alpha) and
/// (j, 1-alpha).
Matrix extend_similarities(const Matrix& base, const ExtendedBatch& ext);

/// Exact adjoint of extend_similarities: distributes every extended entry's
/// gradient onto the base entries it was mixed from, with the same weights.
Matrix collapse_virtual_grads(const Matrix& grad_ext, const ExtendedBatch& ext);

}  // namespace rankloss
