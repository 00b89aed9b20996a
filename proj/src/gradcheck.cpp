#include "rankloss/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "rankloss/dataio.hpp"
#include "rankloss/encoder.hpp"
#include "rankloss/numerics.hpp"
#include "rankloss/rsloss.hpp"
#include "rankloss/simix.hpp"
#include "rankloss/trainer.hpp"

namespace rankloss {

namespace {

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

double loss_value(const EncoderParams& params, const Matrix& X, const Labels& labels,
                  const LossConfig& loss_cfg, const ExtendedBatch* ext) {
    const Matrix embeddings = encoder_forward(params, X, false).first;
    const Matrix sims = similarity_matrix(embeddings, embeddings);
    if (ext) {
        const Matrix sims_ext = extend_similarities(sims, *ext);
        return rs_loss(sims_ext, ext->labels, loss_cfg).loss;
    }
    return rs_loss(sims, labels, loss_cfg).loss;
}

}  // namespace

GradCheckReport end_to_end_gradcheck(int dim, int batch, double tau1, double tau2,
                                     double eps, std::uint64_t seed, bool simix) {
    if (dim < 2) throw BadParam("gradcheck needs dim >= 2");
    if (batch < 4 || batch % 2 != 0) throw BadParam("gradcheck needs an even batch >= 4");
    if (!(eps > 0.0)) throw BadParam("eps must be positive");

    const int per_class = batch % 4 == 0 ? 4 : 2;
    const Dataset data = generate_synthetic(batch / per_class, per_class, dim, 0.3, seed);

    Rng init_rng(seed + 17);
    EncoderParams params = init_encoder(Arch::Mlp, dim, 2 * dim, dim, init_rng);

    LossConfig loss_cfg;
    loss_cfg.tau1 = Temperature(tau1);
    loss_cfg.tau2 = Temperature(tau2);
    loss_cfg.ks = default_kset(simix);
    loss_cfg.clipped = true;

    ExtendedBatch ext;
    if (simix) {
        Rng mix_rng(seed + 29);
        ext = enumerate_virtual(data.labels, mix_rng);
    }
    const ExtendedBatch* ext_ptr = simix ? &ext : nullptr;

    // analytic gradient through the full pipeline
    auto [embeddings, acts] = encoder_forward(params, data.features, true);
    const Matrix sims = similarity_matrix(embeddings, embeddings);
    Matrix grad_sims;
    if (simix) {
        const Matrix sims_ext = extend_similarities(sims, ext);
        grad_sims = collapse_virtual_grads(rs_loss(sims_ext, ext.labels, loss_cfg).grad_sims, ext);
    } else {
        grad_sims = rs_loss(sims, data.labels, loss_cfg).grad_sims;
    }
    const Matrix grad_embed = chain_to_embeddings(grad_sims, embeddings);
    const std::vector<Matrix> analytic =
        encoder_backward(params, data.features, acts, grad_embed);

    GradCheckReport report;
    for (std::size_t w = 0; w < params.mats.size(); ++w) {
        for (Eigen::Index r = 0; r < params.mats[w].rows(); ++r) {
            for (Eigen::Index c = 0; c < params.mats[w].cols(); ++c) {
                const double saved = params.mats[w](r, c);
                params.mats[w](r, c) = saved + eps;
                const double up = loss_value(params, data.features, data.labels, loss_cfg, ext_ptr);
                params.mats[w](r, c) = saved - eps;
                const double down =
                    loss_value(params, data.features, data.labels, loss_cfg, ext_ptr);
                params.mats[w](r, c) = saved;

                const double numeric = (up - down) / (2.0 * eps);
                report.max_rel_err =
                    std::max(report.max_rel_err, rel_err(analytic[w](r, c), numeric));
                ++report.n_params;
            }
        }
    }
    report.pass = report.max_rel_err < report.threshold;
    return report;
}

}  // namespace rankloss
