#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rankloss/error.hpp"

namespace rankloss {

// Row-major throughout: a batch is one example per row, so row views are
// contiguous and per-entry dot products have a fixed summation order.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Labels = std::vector<int>;

/// Positive sigmoid temperature.
struct Temperature {
    double tau;

    explicit Temperature(double t) : tau(t) {
        if (!(t > 0.0)) throw BadParam("temperature must be positive");
    }
};

/// Sorted set of distinct k values for the multi-k loss.
struct KSet {
    std::vector<int> ks;

    explicit KSet(std::vector<int> values) : ks(std::move(values)) {
        if (ks.empty()) throw BadParam("k set must be nonempty");
        for (std::size_t i = 0; i < ks.size(); ++i) {
            if (ks[i] < 1) throw BadParam("every k must be >= 1");
            if (i > 0 && ks[i] <= ks[i - 1])
                throw BadParam("k values must be strictly increasing");
        }
    }

    std::size_t size() const { return ks.size(); }
};

struct LossConfig {
    Temperature tau1{1.0};    // rank sigmoid
    Temperature tau2{0.01};   // similarity-difference sigmoid
    KSet ks{{1, 2, 4, 8, 16}};
    bool clipped = true;      // training-time min(k,|P|) modification
};

}  // namespace rankloss
