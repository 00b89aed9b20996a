#pragma once

#include <optional>
#include <vector>

#include "rankloss/types.hpp"

namespace rankloss {

/// Loss value with analytic gradients for every pairwise similarity.
struct LossResult {
    double loss = 0.0;
    Matrix grad_sims;                   // d loss / d s_ij, diagonal forced to 0
    std::vector<double> per_query_loss; // loss == mean(per_query_loss)
};

/// Smooth recall@k for one query row.
///
/// Returns sum_{x in P} sigma_tau1(k - 1 - sum_{z != x} sigma_tau2(s_qz - s_qx)) / D
/// where D = |P| when cfg.clipped is false, and the numerator is clipped at k
/// with D = min(k, |P|) when cfg.clipped is true. Entries at self_index are
/// excluded from both the positive set and the rank sums.
double smooth_recall_at_k(const Vector& sim_row, const std::vector<bool>& pos_mask,
                          std::optional<int> self_index, int k, const LossConfig& cfg);

/// Multi-k RS@k loss over a batch similarity matrix.
///
/// Every row is used as a query against the rest of the batch; entry (q,z) of
/// sims is the only input read for query q, so gradients land in row q only.
/// The value is mean_q (1/|K|) sum_k (1 - smooth recall@k).
LossResult rs_loss(const Matrix& sims, const Labels& labels, const LossConfig& cfg);

/// Chain similarity gradients back to the embeddings that produced them:
/// G_i = sum_{j != i} (grad_sims(i,j) + grad_sims(j,i)) * E_j.
Matrix chain_to_embeddings(const Matrix& grad_sims, const Matrix& E);

}  // namespace rankloss
