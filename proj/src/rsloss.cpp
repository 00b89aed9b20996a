#include "rankloss/rsloss.hpp"

#include <algorithm>
#include <unordered_map>

#include "rankloss/numerics.hpp"

namespace rankloss {

namespace {

// Per-query rank terms shared by the value and gradient paths.
//
// For the p-th positive x:
//   rank_sum[p]  = sum_{z in omega, z != x} sigma_tau2(s_z - s_x)
//   deriv_sum[p] = sum_{z in omega, z != x} sigma'_tau2(s_z - s_x)
//   hprime(p,z)  = sigma'_tau2(s_z - s_x), zero at z == x and z == self
struct QueryTerms {
    std::vector<int> positives;
    Vector rank_sum;
    Vector deriv_sum;
    Matrix hprime;  // only filled when want_grad
};

QueryTerms build_query_terms(const Vector& row, const std::vector<bool>& pos_mask,
                             std::optional<int> self_index, Temperature tau2,
                             bool want_grad) {
    const int n = static_cast<int>(row.size());
    QueryTerms t;
    for (int z = 0; z < n; ++z) {
        if (self_index && z == *self_index) continue;
        if (pos_mask[static_cast<std::size_t>(z)]) t.positives.push_back(z);
    }
    const int np = static_cast<int>(t.positives.size());
    t.rank_sum = Vector::Zero(np);
    t.deriv_sum = Vector::Zero(np);
    if (want_grad) t.hprime = Matrix::Zero(np, n);

    for (int p = 0; p < np; ++p) {
        const int x = t.positives[static_cast<std::size_t>(p)];
        const double sx = row(x);
        double rsum = 0.0;
        double dsum = 0.0;
        for (int z = 0; z < n; ++z) {
            if (z == x) continue;
            if (self_index && z == *self_index) continue;
            const SigmoidValue s = sigmoid(row(z) - sx, tau2);
            rsum += s.value;
            dsum += s.derivative;
            if (want_grad) t.hprime(p, z) = s.derivative;
        }
        t.rank_sum(p) = rsum;
        t.deriv_sum(p) = dsum;
    }
    return t;
}

// Smooth recall for one k from precomputed rank terms.
double recall_from_terms(const QueryTerms& t, int k, const LossConfig& cfg) {
    const int np = static_cast<int>(t.positives.size());
    double acc = 0.0;
    for (int p = 0; p < np; ++p) {
        acc += sigmoid(static_cast<double>(k) - 1.0 - t.rank_sum(p), cfg.tau1).value;
    }
    if (cfg.clipped) {
        const double denom = static_cast<double>(std::min(k, np));
        return std::min(acc, static_cast<double>(k)) / denom;
    }
    return acc / static_cast<double>(np);
}

// Query loss averaged over K, plus d loss / d row into grad (same length as
// row) when grad != nullptr. The clip acts as subgradient 0 past its boundary.
double query_loss(const Vector& row, const QueryTerms& t, const LossConfig& cfg,
                  Vector* grad) {
    const int np = static_cast<int>(t.positives.size());
    const double inv_nk = 1.0 / static_cast<double>(cfg.ks.size());

    Vector gamma;  // per positive: (1/|K|) sum_k gate_k * sigma'_tau1(u_x) / D_k
    if (grad) gamma = Vector::Zero(np);

    double loss = 0.0;
    for (int k : cfg.ks.ks) {
        double acc = 0.0;
        Vector gk;
        if (grad) gk = Vector::Zero(np);
        for (int p = 0; p < np; ++p) {
            const SigmoidValue s =
                sigmoid(static_cast<double>(k) - 1.0 - t.rank_sum(p), cfg.tau1);
            acc += s.value;
            if (grad) gk(p) = s.derivative;
        }
        double denom;
        bool clipped_out = false;
        if (cfg.clipped) {
            denom = static_cast<double>(std::min(k, np));
            if (acc > static_cast<double>(k)) {
                acc = static_cast<double>(k);
                clipped_out = true;
            }
        } else {
            denom = static_cast<double>(np);
        }
        loss += 1.0 - acc / denom;
        if (grad && !clipped_out) gamma += gk * (inv_nk / denom);
    }
    loss *= inv_nk;

    if (grad) {
        // dL/ds_w = sum_{x in P, x != w} gamma_x h'(s_w - s_x)  -  [w in P] gamma_w S'_w
        for (int p = 0; p < np; ++p) {
            const double g = gamma(p);
            if (g == 0.0) continue;
            *grad += g * t.hprime.row(p).transpose();
            (*grad)(t.positives[static_cast<std::size_t>(p)]) -= g * t.deriv_sum(p);
        }
    }
    return loss;
}

}  // namespace

double smooth_recall_at_k(const Vector& sim_row, const std::vector<bool>& pos_mask,
                          std::optional<int> self_index, int k, const LossConfig& cfg) {
    if (static_cast<Eigen::Index>(pos_mask.size()) != sim_row.size())
        throw DimensionMismatch("smooth_recall_at_k: mask/row length mismatch");
    if (k < 1) throw BadParam("k must be >= 1");
    if (self_index && (*self_index < 0 || *self_index >= sim_row.size()))
        throw IndexOutOfRange("smooth_recall_at_k: self_index out of range");

    const QueryTerms t =
        build_query_terms(sim_row, pos_mask, self_index, cfg.tau2, /*want_grad=*/false);
    if (t.positives.empty()) throw NoPositives(self_index ? *self_index : -1);
    return recall_from_terms(t, k, cfg);
}

LossResult rs_loss(const Matrix& sims, const Labels& labels, const LossConfig& cfg) {
    const Eigen::Index m = sims.rows();
    if (sims.cols() != m) throw NotSquare("rs_loss: similarity matrix is not square");
    if (static_cast<Eigen::Index>(labels.size()) != m)
        throw DimensionMismatch("rs_loss: labels length does not match batch size");

    std::unordered_map<int, int> class_count;
    for (int c : labels) ++class_count[c];
    for (Eigen::Index q = 0; q < m; ++q) {
        if (class_count[labels[static_cast<std::size_t>(q)]] < 2)
            throw NoPositives(static_cast<int>(q));
    }

    LossResult result;
    result.grad_sims = Matrix::Zero(m, m);
    result.per_query_loss.resize(static_cast<std::size_t>(m));

    std::vector<bool> mask(static_cast<std::size_t>(m));
    const double inv_m = 1.0 / static_cast<double>(m);
    double total = 0.0;
    for (Eigen::Index q = 0; q < m; ++q) {
        const int cls = labels[static_cast<std::size_t>(q)];
        for (Eigen::Index z = 0; z < m; ++z)
            mask[static_cast<std::size_t>(z)] = labels[static_cast<std::size_t>(z)] == cls;

        const Vector row = sims.row(q).transpose();
        const QueryTerms t = build_query_terms(row, mask, static_cast<int>(q), cfg.tau2,
                                               /*want_grad=*/true);
        Vector grad = Vector::Zero(m);
        const double lq = query_loss(row, t, cfg, &grad);
        result.per_query_loss[static_cast<std::size_t>(q)] = lq;
        total += lq;
        result.grad_sims.row(q) = inv_m * grad.transpose();
        result.grad_sims(q, q) = 0.0;
    }
    result.loss = total * inv_m;
    return result;
}

Matrix chain_to_embeddings(const Matrix& grad_sims, const Matrix& E) {
    const Eigen::Index m = grad_sims.rows();
    if (grad_sims.cols() != m)
        throw DimensionMismatch("chain_to_embeddings: gradient matrix is not square");
    if (E.rows() != m)
        throw DimensionMismatch("chain_to_embeddings: embedding row count mismatch");
    Matrix w = grad_sims + grad_sims.transpose();
    w.diagonal().setZero();
    return w * E;
}

}  // namespace rankloss
