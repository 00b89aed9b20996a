#pragma once

#include <cstdint>

namespace rankloss {

struct GradCheckReport {
    double max_rel_err = 0.0;
    double threshold = 1e-4;
    int n_params = 0;
    bool pass = false;
};

/// End-to-end check of the analytic gradient of
///   loss(similarities(encoder(theta, X)))  (optionally through SiMix)
/// against central finite differences over every encoder parameter, on a
/// seeded random instance with class-balanced labels.
GradCheckReport end_to_end_gradcheck(int dim, int batch, double tau1, double tau2,
                                     double eps, std::uint64_t seed, bool simix);

}  // namespace rankloss
