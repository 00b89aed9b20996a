#include "rankloss/encoder.hpp"

#include <cmath>

#include "rankloss/numerics.hpp"

namespace rankloss {

namespace {

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
    return w;
}

void check_shapes(const EncoderParams& params, const std::vector<Matrix>& grads) {
    if (grads.size() != params.mats.size())
        throw ShapeMismatch("gradient count does not match parameter count");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].rows() != params.mats[i].rows() || grads[i].cols() != params.mats[i].cols())
            throw ShapeMismatch("gradient shape does not match parameter " + std::to_string(i));
    }
}

}  // namespace

EncoderParams init_encoder(Arch arch, int input_dim, int hidden_dim, int output_dim,
                           Rng& rng) {
    if (input_dim < 1 || output_dim < 1) throw BadParam("encoder dims must be positive");
    EncoderParams p;
    p.arch = arch;
    p.input_dim = input_dim;
    p.output_dim = output_dim;
    if (arch == Arch::Linear) {
        p.hidden_dim = 0;
        p.mats.push_back(glorot_uniform(input_dim, output_dim, rng));
        p.mats.push_back(Matrix::Zero(1, output_dim));
    } else {
        if (hidden_dim < 1) throw BadParam("mlp hidden width must be positive");
        p.hidden_dim = hidden_dim;
        p.mats.push_back(glorot_uniform(input_dim, hidden_dim, rng));
        p.mats.push_back(Matrix::Zero(1, hidden_dim));
        p.mats.push_back(glorot_uniform(hidden_dim, output_dim, rng));
        p.mats.push_back(Matrix::Zero(1, output_dim));
    }
    return p;
}

std::pair<Matrix, std::optional<Activations>> encoder_forward(const EncoderParams& params,
                                                              const Matrix& X, bool retain) {
    if (static_cast<int>(X.cols()) != params.input_dim)
        throw DimensionMismatch("encoder_forward: input has " + std::to_string(X.cols()) +
                                " cols, expected " + std::to_string(params.input_dim));

    Matrix hidden;
    Matrix prenorm;
    if (params.arch == Arch::Linear) {
        prenorm = X * params.mats[0];
        prenorm.rowwise() += params.mats[1].row(0);
    } else {
        hidden = X * params.mats[0];
        hidden.rowwise() += params.mats[1].row(0);
        hidden = hidden.array().tanh();
        prenorm = hidden * params.mats[2];
        prenorm.rowwise() += params.mats[3].row(0);
    }

    Vector norms(prenorm.rows());
    Matrix embed(prenorm.rows(), prenorm.cols());
    for (Eigen::Index i = 0; i < prenorm.rows(); ++i) {
        const double norm = prenorm.row(i).norm();
        if (norm < 1e-30) throw ZeroVector();
        norms(i) = norm;
        embed.row(i) = prenorm.row(i) / norm;
    }

    if (!retain) return {std::move(embed), std::nullopt};
    Activations acts;
    acts.hidden = std::move(hidden);
    acts.prenorm = std::move(prenorm);
    acts.norms = std::move(norms);
    acts.embed = embed;
    return {std::move(embed), std::move(acts)};
}

std::vector<Matrix> encoder_backward(const EncoderParams& params, const Matrix& X,
                                     const std::optional<Activations>& acts,
                                     const Matrix& grad_E) {
    if (!acts) throw ActivationsMissing();
    if (grad_E.rows() != X.rows() || static_cast<int>(grad_E.cols()) != params.output_dim)
        throw DimensionMismatch("encoder_backward: grad_E shape mismatch");

    // Through normalization: dY_i = (g_i - (g_i . e_i) e_i) / ||y_i||
    Matrix grad_prenorm(grad_E.rows(), grad_E.cols());
    for (Eigen::Index i = 0; i < grad_E.rows(); ++i) {
        const double along = grad_E.row(i).dot(acts->embed.row(i));
        grad_prenorm.row(i) = (grad_E.row(i) - along * acts->embed.row(i)) / acts->norms(i);
    }

    std::vector<Matrix> grads;
    if (params.arch == Arch::Linear) {
        grads.push_back(X.transpose() * grad_prenorm);
        grads.push_back(grad_prenorm.colwise().sum());
    } else {
        const Matrix grad_hidden_out = grad_prenorm * params.mats[2].transpose();
        const Matrix grad_preact =
            grad_hidden_out.array() * (1.0 - acts->hidden.array().square());
        grads.push_back(X.transpose() * grad_preact);
        grads.push_back(grad_preact.colwise().sum());
        grads.push_back(acts->hidden.transpose() * grad_prenorm);
        grads.push_back(grad_prenorm.colwise().sum());
    }
    return grads;
}

AdamState init_adam(const EncoderParams& params, double lr) {
    AdamState s;
    s.lr = lr;
    for (const Matrix& w : params.mats) {
        s.m.push_back(Matrix::Zero(w.rows(), w.cols()));
        s.v.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
    return s;
}

void adam_step(AdamState& state, EncoderParams& params, const std::vector<Matrix>& grads) {
    check_shapes(params, grads);
    if (state.m.size() != params.mats.size())
        throw ShapeMismatch("adam state does not match parameter count");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.mats.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] =
            state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i].array().square().matrix();
        const Matrix mhat = state.m[i] / bc1;
        const Matrix vhat = state.v[i] / bc2;
        params.mats[i].array() -=
            state.lr * mhat.array() / (vhat.array().sqrt() + state.eps);
    }
}

}  // namespace rankloss
