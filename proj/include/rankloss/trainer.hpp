#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rankloss/dataio.hpp"
#include "rankloss/encoder.hpp"
#include "rankloss/rng.hpp"
#include "rankloss/types.hpp"

namespace rankloss {

enum class LossKind { RSK, Contrastive };

/// Step decay: lr is multiplied by factor at each milestone iteration.
struct LrSchedule {
    double factor = 1.0;
    std::vector<int> milestones;

    double lr_at(double base_lr, int iteration) const;
};

struct TrainConfig {
    int batch_size = 64;
    int per_class = 4;
    int iterations = 200;
    bool simix = false;
    LossConfig loss;
    LossKind kind = LossKind::RSK;
    double lr = 0.01;
    LrSchedule schedule;
    int chunk_size = 64;
    std::uint64_t seed = 0;
    int eval_every = 25;
    Arch arch = Arch::Linear;
    int hidden_dim = 0;
    int embed_dim = 16;
    double contrastive_margin = 0.5;
};

/// k values trained against when none are configured explicitly.
KSet default_kset(bool simix);

/// Extended batch size under class-balanced sampling: every class of m
/// members contributes C(m,2) virtual examples.
int simix_expanded_size(int batch_size, int per_class);

/// Loss over a batch of embeddings plus its gradient with respect to them.
/// Runs the similarity -> (optional SiMix extension) -> loss -> collapse ->
/// chain pipeline shared by both training paths.
struct EmbeddingGrad {
    double loss = 0.0;
    Matrix grad_embeddings;
};
EmbeddingGrad loss_and_embedding_grad(const Matrix& embeddings, const Labels& labels,
                                      const TrainConfig& cfg, Rng& mix_rng);

/// Reference update: one retained-activation forward, full backward, one
/// optimizer step.
double train_step_single_pass(EncoderParams& params, AdamState& state, const Matrix& X,
                              const Labels& labels, const TrainConfig& cfg, Rng& mix_rng);

/// Memory-bounded update: gradient-free forward over the whole batch, loss
/// gradient with respect to embeddings only, then chunked re-forward with
/// retained activations to accumulate parameter gradients. Retained
/// activation memory is bounded by cfg.chunk_size rows, never the batch.
double train_step_two_pass(EncoderParams& params, AdamState& state, const Matrix& X,
                           const Labels& labels, const TrainConfig& cfg, Rng& mix_rng);

struct ValMetrics {
    double r_at_1 = 0.0;
    std::vector<double> recall;  // one per k in cfg.loss.ks
    double map = 0.0;
};

struct IterationRow {
    int iteration = 0;
    double loss = 0.0;
    double elapsed_ms = 0.0;
    std::optional<ValMetrics> val;
};

struct StageTimings {
    double sample_ms = 0.0;
    double step_ms = 0.0;
    double eval_ms = 0.0;
};

struct TrainReport {
    std::vector<IterationRow> rows;
    StageTimings timings;
};

/// Full training loop: class-balanced batches, two-pass updates, periodic
/// validation metrics on val when given. Configuration problems throw before
/// the first iteration.
std::pair<EncoderParams, TrainReport> train_loop(const Dataset& train, const Dataset* val,
                                                 const TrainConfig& cfg);

}  // namespace rankloss
