#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rankloss/rng.hpp"
#include "rankloss/types.hpp"

namespace rankloss {

enum class Arch { Linear, Mlp };

/// Embedding model parameters. Linear: { W (p x d), b (1 x d) }.
/// MLP: { W1 (p x h), b1 (1 x h), W2 (h x d), b2 (1 x d) } with tanh hidden.
/// The forward output is always L2-normalized per row.
struct EncoderParams {
    Arch arch = Arch::Linear;
    int input_dim = 0;
    int hidden_dim = 0;  // 0 for linear
    int output_dim = 0;
    std::vector<Matrix> mats;
};

/// Intermediate tensors needed to run backward; only produced on request.
struct Activations {
    Matrix hidden;   // tanh output, empty for linear
    Matrix prenorm;  // pre-normalization embeddings
    Vector norms;    // per-row prenorm norms
    Matrix embed;    // normalized embeddings (same as the forward output)
};

EncoderParams init_encoder(Arch arch, int input_dim, int hidden_dim, int output_dim,
                           Rng& rng);

/// Row-wise forward map to unit-norm embeddings. retain=false keeps no
/// intermediates, for gradient-free passes over large batches.
std::pair<Matrix, std::optional<Activations>> encoder_forward(const EncoderParams& params,
                                                              const Matrix& X, bool retain);

/// Gradients of <grad_E, E> with respect to every parameter, chained through
/// the normalization Jacobian (I - e e^T) / ||prenorm||.
std::vector<Matrix> encoder_backward(const EncoderParams& params, const Matrix& X,
                                     const std::optional<Activations>& acts,
                                     const Matrix& grad_E);

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long step = 0;
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState init_adam(const EncoderParams& params, double lr);

/// Standard Adam update with bias correction; increments the step counter.
void adam_step(AdamState& state, EncoderParams& params, const std::vector<Matrix>& grads);

}  // namespace rankloss
