#include "rankloss/retrieval_eval.hpp"

#include <algorithm>

#include "rankloss/numerics.hpp"

namespace rankloss {

namespace {

// Ranks of all positives in one row, unsorted.
std::vector<int> positive_ranks(const Vector& row, const std::vector<bool>& pos_mask,
                                std::optional<int> self_index) {
    std::vector<int> ranks;
    for (int x = 0; x < static_cast<int>(row.size()); ++x) {
        if (self_index && x == *self_index) continue;
        if (!pos_mask[static_cast<std::size_t>(x)]) continue;
        ranks.push_back(exact_rank(row, x, self_index));
    }
    return ranks;
}

double average_precision(std::vector<int> ranks) {
    std::sort(ranks.begin(), ranks.end());
    double ap = 0.0;
    for (std::size_t idx = 0; idx < ranks.size(); ++idx) {
        // precision at this positive's rank: positives with rank <= r, over r
        const std::size_t hits =
            static_cast<std::size_t>(std::upper_bound(ranks.begin(), ranks.end(), ranks[idx]) -
                                     ranks.begin());
        ap += static_cast<double>(hits) / static_cast<double>(ranks[idx]);
    }
    return ap / static_cast<double>(ranks.size());
}

std::vector<bool> class_mask(const Labels& labels, int cls) {
    std::vector<bool> mask(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i] == cls;
    return mask;
}

}  // namespace

int exact_rank(const Vector& sim_row, int x, std::optional<int> self_index) {
    const int n = static_cast<int>(sim_row.size());
    if (x < 0 || x >= n) throw IndexOutOfRange("exact_rank: candidate index out of range");
    if (self_index && (*self_index < 0 || *self_index >= n))
        throw IndexOutOfRange("exact_rank: self index out of range");
    if (self_index && x == *self_index)
        throw IndexOutOfRange("exact_rank: candidate equals the excluded query");

    const double sx = sim_row(x);
    int above = 0;
    for (int z = 0; z < n; ++z) {
        if (z == x) continue;
        if (self_index && z == *self_index) continue;
        if (sim_row(z) >= sx) ++above;
    }
    return 1 + above;
}

double recall_at_k(const Vector& sim_row, const std::vector<bool>& pos_mask,
                   std::optional<int> self_index, int k) {
    if (static_cast<Eigen::Index>(pos_mask.size()) != sim_row.size())
        throw DimensionMismatch("recall_at_k: mask/row length mismatch");
    const std::vector<int> ranks = positive_ranks(sim_row, pos_mask, self_index);
    if (ranks.empty()) throw NoPositives(self_index ? *self_index : -1);
    int hits = 0;
    for (int r : ranks)
        if (r <= k) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

int benchmark_r_at_k(const Vector& sim_row, const std::vector<bool>& pos_mask,
                     std::optional<int> self_index, int k) {
    if (static_cast<Eigen::Index>(pos_mask.size()) != sim_row.size())
        throw DimensionMismatch("benchmark_r_at_k: mask/row length mismatch");
    const std::vector<int> ranks = positive_ranks(sim_row, pos_mask, self_index);
    if (ranks.empty()) throw NoPositives(self_index ? *self_index : -1);
    for (int r : ranks)
        if (r <= k) return 1;
    return 0;
}

double mean_average_precision(const Matrix& sims, const Labels& labels, bool self_retrieval) {
    const Eigen::Index nq = sims.rows();
    if (static_cast<Eigen::Index>(labels.size()) != sims.cols())
        throw DimensionMismatch("mean_average_precision: labels length mismatch");
    double total = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q) {
        const std::vector<bool> mask = class_mask(labels, labels[static_cast<std::size_t>(q)]);
        const std::optional<int> self =
            self_retrieval ? std::optional<int>(static_cast<int>(q)) : std::nullopt;
        const std::vector<int> ranks = positive_ranks(sims.row(q).transpose(), mask, self);
        if (ranks.empty()) throw NoPositives(static_cast<int>(q));
        total += average_precision(ranks);
    }
    return total / static_cast<double>(nq);
}

double MetricTable::recall_for(int k) const {
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (ks[i] == k) return recall[i];
    throw BadParam("k not present in metric table");
}

double MetricTable::r_for(int k) const {
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (ks[i] == k) return r_at[i];
    throw BadParam("k not present in metric table");
}

MetricTable evaluate(const Matrix& embeddings, const Labels& labels, const KSet& ks,
                     int tile_rows) {
    const int n = static_cast<int>(embeddings.rows());
    if (static_cast<int>(labels.size()) != n)
        throw DimensionMismatch("evaluate: labels length does not match batch");
    if (tile_rows < 1) throw BadParam("tile_rows must be >= 1");

    MetricTable table;
    table.ks = ks.ks;
    table.recall.assign(table.ks.size(), 0.0);
    table.r_at.assign(table.ks.size(), 0.0);

    double map_total = 0.0;
    double r1_total = 0.0;
    for (int start = 0; start < n; start += tile_rows) {
        const int rows = std::min(tile_rows, n - start);
        const Matrix tile =
            similarity_matrix(embeddings.middleRows(start, rows), embeddings);
        for (int t = 0; t < rows; ++t) {
            const int q = start + t;
            const Vector row = tile.row(t).transpose();
            const std::vector<bool> mask = class_mask(labels, labels[static_cast<std::size_t>(q)]);
            const std::vector<int> ranks = positive_ranks(row, mask, q);
            if (ranks.empty()) throw NoPositives(q);

            const int best = *std::min_element(ranks.begin(), ranks.end());
            r1_total += best <= 1 ? 1.0 : 0.0;
            for (std::size_t i = 0; i < table.ks.size(); ++i) {
                int hits = 0;
                for (int r : ranks)
                    if (r <= table.ks[i]) ++hits;
                table.recall[i] += static_cast<double>(hits) / static_cast<double>(ranks.size());
                table.r_at[i] += best <= table.ks[i] ? 1.0 : 0.0;
            }
            map_total += average_precision(ranks);
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < table.ks.size(); ++i) {
        table.recall[i] *= inv_n;
        table.r_at[i] *= inv_n;
    }
    table.map = map_total * inv_n;
    table.r_at_1 = r1_total * inv_n;
    return table;
}

}  // namespace rankloss
