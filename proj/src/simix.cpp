#include "rankloss/simix.hpp"

#include <array>
#include <map>

namespace rankloss {

namespace {

// (row index into base, mixing coefficient) pairs for one extended row.
using Parents = std::array<std::pair<int, double>, 2>;

Parents parents_of(int a, const ExtendedBatch& ext) {
    if (a < ext.base_size) return {{{a, 1.0}, {-1, 0.0}}};
    const VirtualSpec& v = ext.virtuals[static_cast<std::size_t>(a - ext.base_size)];
    return {{{v.i, v.alpha}, {v.j, 1.0 - v.alpha}}};
}

void validate_specs(const Matrix& base, const ExtendedBatch& ext) {
    for (const VirtualSpec& v : ext.virtuals) {
        if (v.i < 0 || v.j < 0 || v.i >= static_cast<int>(base.rows()) ||
            v.j >= static_cast<int>(base.rows()))
            throw IndexOutOfRange("virtual example references a row outside the base batch");
    }
}

}  // namespace

ExtendedBatch enumerate_virtual(const Labels& labels, Rng& rng) {
    ExtendedBatch ext;
    ext.base_size = static_cast<int>(labels.size());
    ext.labels = labels;

    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < ext.base_size; ++i)
        by_class[labels[static_cast<std::size_t>(i)]].push_back(i);

    for (const auto& [cls, members] : by_class) {
        for (std::size_t a = 0; a + 1 < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                ext.virtuals.push_back({members[a], members[b], rng.uniform_open(), cls});
                ext.labels.push_back(cls);
            }
        }
    }
    return ext;
}

Matrix extend_similarities(const Matrix& base, const ExtendedBatch& ext) {
    if (base.rows() != base.cols() || static_cast<int>(base.rows()) != ext.base_size)
        throw DimensionMismatch("extend_similarities: base must be MxM with M = base_size");
    validate_specs(base, ext);

    const int n = ext.total_size();
    Matrix out(n, n);
    out.topLeftCorner(ext.base_size, ext.base_size) = base;

    for (int a = 0; a < n; ++a) {
        const Parents pa = parents_of(a, ext);
        for (int b = (a < ext.base_size ? ext.base_size : 0); b < n; ++b) {
            const Parents pb = parents_of(b, ext);
            double s = 0.0;
            for (const auto& [pi, ca] : pa) {
                if (pi < 0) continue;
                for (const auto& [pj, cb] : pb) {
                    if (pj < 0) continue;
                    s += ca * cb * base(pi, pj);
                }
            }
            out(a, b) = s;
        }
    }
    return out;
}

Matrix collapse_virtual_grads(const Matrix& grad_ext, const ExtendedBatch& ext) {
    const int n = ext.total_size();
    if (grad_ext.rows() != n || grad_ext.cols() != n)
        throw DimensionMismatch("collapse_virtual_grads: gradient shape does not match batch");

    Matrix out = Matrix::Zero(ext.base_size, ext.base_size);
    for (int a = 0; a < n; ++a) {
        const Parents pa = parents_of(a, ext);
        for (int b = 0; b < n; ++b) {
            const double g = grad_ext(a, b);
            if (g == 0.0) continue;
            const Parents pb = parents_of(b, ext);
            for (const auto& [pi, ca] : pa) {
                if (pi < 0) continue;
                for (const auto& [pj, cb] : pb) {
                    if (pj < 0) continue;
                    out(pi, pj) += ca * cb * g;
                }
            }
        }
    }
    return out;
}

}  // namespace rankloss
