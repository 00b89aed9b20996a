#pragma once

#include <optional>
#include <vector>

#include "rankloss/types.hpp"

namespace rankloss {

/// Exact rank of candidate x in one similarity row: 1 + the number of other
/// candidates z with s_qz >= s_qx. Ties count against x (Heaviside with
/// H(0) = 1). self_index, when given, is excluded from the count.
int exact_rank(const Vector& sim_row, int x, std::optional<int> self_index);

/// Fraction of the query's positives ranked within the top k.
double recall_at_k(const Vector& sim_row, const std::vector<bool>& pos_mask,
                   std::optional<int> self_index, int k);

/// Benchmark-style r@k: 1 iff at least one positive has rank <= k.
int benchmark_r_at_k(const Vector& sim_row, const std::vector<bool>& pos_mask,
                     std::optional<int> self_index, int k);

/// Mean over queries of average precision, same tie rule as exact_rank.
/// With self_retrieval the query is excluded from its own database row.
double mean_average_precision(const Matrix& sims, const Labels& labels, bool self_retrieval);

/// Per-k retrieval metrics averaged over all queries.
struct MetricTable {
    std::vector<int> ks;
    std::vector<double> recall;  // paper-definition recall@k, per k
    std::vector<double> r_at;    // benchmark r@k, per k
    double map = 0.0;
    double r_at_1 = 0.0;         // always computed, whether or not 1 is in ks

    double recall_for(int k) const;
    double r_for(int k) const;
};

/// Self-retrieval evaluation of an embedded batch: every row queries all the
/// others. Row tiles of the similarity computation only group work; tile size
/// cannot change any metric.
MetricTable evaluate(const Matrix& embeddings, const Labels& labels, const KSet& ks,
                     int tile_rows = 256);

}  // namespace rankloss
