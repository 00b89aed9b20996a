#include "rankloss/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rankloss/numerics.hpp"
#include "rankloss/retrieval_eval.hpp"
#include "rankloss/rsloss.hpp"
#include "rankloss/sampler.hpp"
#include "rankloss/simix.hpp"

namespace rankloss {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct SimLoss {
    double loss = 0.0;
    Matrix grad;
};

// Pairwise contrastive baseline: squared distance on matching pairs,
// squared margin hinge on non-matching ones, averaged over unordered pairs.
// Distances come from similarities of unit vectors: d^2 = 2 - 2s.
SimLoss contrastive_loss(const Matrix& sims, const Labels& labels, double margin) {
    const Eigen::Index m = sims.rows();
    if (sims.cols() != m) throw NotSquare("contrastive_loss: similarity matrix is not square");
    if (static_cast<Eigen::Index>(labels.size()) != m)
        throw DimensionMismatch("contrastive_loss: labels length mismatch");

    SimLoss out;
    out.grad = Matrix::Zero(m, m);
    const double n_pairs = static_cast<double>(m) * static_cast<double>(m - 1) / 2.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double s = sims(i, j);
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
                total += 2.0 - 2.0 * s;
                out.grad(i, j) += -2.0 / n_pairs;
            } else {
                const double dist = std::sqrt(std::max(2.0 - 2.0 * s, 0.0));
                if (dist < margin) {
                    const double gap = margin - dist;
                    total += gap * gap;
                    out.grad(i, j) += 2.0 * gap / std::max(dist, 1e-9) / n_pairs;
                }
            }
        }
    }
    out.loss = total / n_pairs;
    return out;
}

SimLoss loss_on_sims(const Matrix& sims, const Labels& labels, const TrainConfig& cfg) {
    if (cfg.kind == LossKind::Contrastive)
        return contrastive_loss(sims, labels, cfg.contrastive_margin);
    LossResult r = rs_loss(sims, labels, cfg.loss);
    return {r.loss, std::move(r.grad_sims)};
}

std::vector<Matrix> zero_like(const EncoderParams& params) {
    std::vector<Matrix> out;
    out.reserve(params.mats.size());
    for (const Matrix& w : params.mats) out.push_back(Matrix::Zero(w.rows(), w.cols()));
    return out;
}

void validate_step_config(const TrainConfig& cfg, Eigen::Index batch_rows) {
    if (cfg.chunk_size < 1) throw BadParam("chunk_size must be >= 1");
    if (batch_rows < 2) throw BadParam("batch must hold at least 2 examples");
}

}  // namespace

double LrSchedule::lr_at(double base_lr, int iteration) const {
    double lr = base_lr;
    for (int milestone : milestones)
        if (iteration >= milestone) lr *= factor;
    return lr;
}

KSet default_kset(bool simix) {
    if (simix) return KSet({1, 2, 4, 8, 12, 16, 20, 24, 28, 32});
    return KSet({1, 2, 4, 8, 16});
}

int simix_expanded_size(int batch_size, int per_class) {
    if (per_class < 1 || batch_size % per_class != 0)
        throw NotDivisible("batch size must be a positive multiple of per-class count");
    const int n_classes = batch_size / per_class;
    return batch_size + n_classes * (per_class * (per_class - 1) / 2);
}

EmbeddingGrad loss_and_embedding_grad(const Matrix& embeddings, const Labels& labels,
                                      const TrainConfig& cfg, Rng& mix_rng) {
    const Matrix sims = similarity_matrix(embeddings, embeddings);

    double loss;
    Matrix grad_sims;
    if (cfg.simix) {
        const ExtendedBatch ext = enumerate_virtual(labels, mix_rng);
        const Matrix sims_ext = extend_similarities(sims, ext);
        SimLoss r = loss_on_sims(sims_ext, ext.labels, cfg);
        loss = r.loss;
        grad_sims = collapse_virtual_grads(r.grad, ext);
    } else {
        SimLoss r = loss_on_sims(sims, labels, cfg);
        loss = r.loss;
        grad_sims = std::move(r.grad);
    }

    return {loss, chain_to_embeddings(grad_sims, embeddings)};
}

double train_step_single_pass(EncoderParams& params, AdamState& state, const Matrix& X,
                              const Labels& labels, const TrainConfig& cfg, Rng& mix_rng) {
    validate_step_config(cfg, X.rows());
    auto [embeddings, acts] = encoder_forward(params, X, /*retain=*/true);
    const EmbeddingGrad eg = loss_and_embedding_grad(embeddings, labels, cfg, mix_rng);
    const std::vector<Matrix> grads =
        encoder_backward(params, X, acts, eg.grad_embeddings);
    adam_step(state, params, grads);
    return eg.loss;
}

double train_step_two_pass(EncoderParams& params, AdamState& state, const Matrix& X,
                           const Labels& labels, const TrainConfig& cfg, Rng& mix_rng) {
    validate_step_config(cfg, X.rows());

    // pass 1: embeddings only, no retained activations
    const Matrix embeddings = encoder_forward(params, X, /*retain=*/false).first;
    const EmbeddingGrad eg = loss_and_embedding_grad(embeddings, labels, cfg, mix_rng);

    // pass 2: chunked re-forward with activations, backward the stored
    // embedding gradients, accumulate parameter gradients in chunk order
    std::vector<Matrix> grads = zero_like(params);
    const int n = static_cast<int>(X.rows());
    for (int start = 0; start < n; start += cfg.chunk_size) {
        const int rows = std::min(cfg.chunk_size, n - start);
        const Matrix chunk = X.middleRows(start, rows);
        auto [chunk_embed, acts] = encoder_forward(params, chunk, /*retain=*/true);
        const std::vector<Matrix> chunk_grads = encoder_backward(
            params, chunk, acts, eg.grad_embeddings.middleRows(start, rows));
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += chunk_grads[i];
    }

    adam_step(state, params, grads);
    return eg.loss;
}

std::pair<EncoderParams, TrainReport> train_loop(const Dataset& train, const Dataset* val,
                                                 const TrainConfig& cfg) {
    // surface configuration problems before iteration 0
    if (cfg.iterations < 0) throw BadParam("iterations must be >= 0");
    if (cfg.eval_every < 1) throw BadParam("eval_every must be >= 1");
    if (cfg.chunk_size < 1) throw BadParam("chunk_size must be >= 1");
    if (train.dim() < 1) throw BadParam("training data has no features");
    const DatasetIndex index =
        filter_small_classes(DatasetIndex::from_labels(train.labels), cfg.per_class);
    if (cfg.batch_size % cfg.per_class != 0)
        throw NotDivisible("batch size must be divisible by samples_per_class");
    if (cfg.batch_size / cfg.per_class > index.num_classes())
        throw TooFewClasses("dataset has " + std::to_string(index.num_classes()) +
                            " usable classes, batch needs " +
                            std::to_string(cfg.batch_size / cfg.per_class));
    if (val && val->dim() != train.dim())
        throw DimensionMismatch("validation feature dimension differs from training data");

    Rng init_rng(cfg.seed);
    EncoderParams params =
        init_encoder(cfg.arch, train.dim(), cfg.hidden_dim, cfg.embed_dim, init_rng);
    AdamState state = init_adam(params, cfg.lr);
    Rng sample_rng(cfg.seed + 1);
    Rng mix_rng(cfg.seed + 2);

    TrainReport report;
    report.rows.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int it = 1; it <= cfg.iterations; ++it) {
        const auto t0 = Clock::now();
        const std::vector<int> batch =
            class_balanced_batch(index, cfg.batch_size, cfg.per_class, sample_rng);
        Matrix X(cfg.batch_size, train.dim());
        Labels labels(static_cast<std::size_t>(cfg.batch_size));
        for (int r = 0; r < cfg.batch_size; ++r) {
            X.row(r) = train.features.row(batch[static_cast<std::size_t>(r)]);
            labels[static_cast<std::size_t>(r)] =
                train.labels[static_cast<std::size_t>(batch[static_cast<std::size_t>(r)])];
        }
        report.timings.sample_ms += ms_since(t0);

        const auto t1 = Clock::now();
        state.lr = cfg.schedule.lr_at(cfg.lr, it);
        const double loss = train_step_two_pass(params, state, X, labels, cfg, mix_rng);
        report.timings.step_ms += ms_since(t1);

        IterationRow row;
        row.iteration = it;
        row.loss = loss;
        if (val && it % cfg.eval_every == 0) {
            const auto t2 = Clock::now();
            const Matrix embedded = encoder_forward(params, val->features, false).first;
            const MetricTable metrics = evaluate(embedded, val->labels, cfg.loss.ks);
            ValMetrics vm;
            vm.r_at_1 = metrics.r_at_1;
            vm.recall = metrics.recall;
            vm.map = metrics.map;
            row.val = std::move(vm);
            report.timings.eval_ms += ms_since(t2);
        }
        row.elapsed_ms = ms_since(t0);
        report.rows.push_back(std::move(row));
    }
    return {std::move(params), std::move(report)};
}

}  // namespace rankloss
