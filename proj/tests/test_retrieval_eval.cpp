#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rankloss/dataio.hpp"
#include "rankloss/numerics.hpp"
#include "rankloss/retrieval_eval.hpp"
#include "rankloss/rng.hpp"

using namespace rankloss;

namespace {

// Sort-based rank oracle with the same tie rule: rank of x is the number of
// candidates (x included) whose similarity is >= s_x.
int rank_by_sorting(const Vector& row, int x, std::optional<int> self) {
    std::vector<double> values;
    for (int z = 0; z < static_cast<int>(row.size()); ++z) {
        if (self && z == *self) continue;
        values.push_back(row(z));
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    const double sx = row(x);
    return static_cast<int>(std::upper_bound(values.begin(), values.end(), sx,
                                             std::greater<>()) -
                            values.begin()) +
           static_cast<int>(std::count(values.begin(), values.end(), sx));
}

// Definitional AP oracle: walk the ranked list, precision at each positive.
double ap_by_ranked_walk(const Vector& row, const std::vector<bool>& mask,
                         std::optional<int> self) {
    std::vector<int> order;
    for (int z = 0; z < static_cast<int>(row.size()); ++z) {
        if (self && z == *self) continue;
        order.push_back(z);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return row(a) > row(b); });

    // tie-group walk: every member of a tie group takes the group's end rank
    double ap = 0.0;
    int n_pos = 0;
    std::size_t i = 0;
    int seen = 0;
    int pos_seen = 0;
    while (i < order.size()) {
        std::size_t j = i;
        int group_pos = 0;
        while (j < order.size() && row(order[j]) == row(order[i])) {
            if (mask[static_cast<std::size_t>(order[j])]) ++group_pos;
            ++j;
        }
        seen += static_cast<int>(j - i);
        pos_seen += group_pos;
        // all positives in the group share rank == seen (worst in group)
        ap += group_pos * static_cast<double>(pos_seen) / static_cast<double>(seen);
        n_pos += group_pos;
        i = j;
    }
    return ap / n_pos;
}

Vector random_row(Rng& rng, int n, bool quantized) {
    Vector row(n);
    for (int i = 0; i < n; ++i) {
        // quantized rows create deliberate ties
        row(i) = quantized ? std::round(rng.uniform(-4.0, 4.0)) / 4.0 : rng.uniform(-1.0, 1.0);
    }
    return row;
}

}  // namespace

TEST_CASE("exact_rank on a strict maximum") {
    Vector row(3);
    row << 0.9, 0.5, 0.7;
    CHECK(exact_rank(row, 0, std::nullopt) == 1);
}

TEST_CASE("exact_rank counts ties against the candidate") {
    Vector row(3);
    row << 0.7, 0.7, 0.5;
    CHECK(exact_rank(row, 0, std::nullopt) == 2);
    CHECK(exact_rank(row, 1, std::nullopt) == 2);
}

TEST_CASE("exact_rank matches the sort oracle on random rows") {
    Rng rng(21);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_int(15));
        const bool quantized = trial % 2 == 0;
        const Vector row = random_row(rng, n, quantized);
        const int self = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        int x = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        if (x == self) x = (x + 1) % n;
        CHECK(exact_rank(row, x, self) == rank_by_sorting(row, x, self));
    }
}

TEST_CASE("exact_rank rejects bad indices") {
    Vector row(3);
    row << 0.1, 0.2, 0.3;
    CHECK_THROWS_AS(exact_rank(row, 5, std::nullopt), IndexOutOfRange);
    CHECK_THROWS_AS(exact_rank(row, 1, 1), IndexOutOfRange);
}

TEST_CASE("recall_at_k counts positives within the cutoff") {
    // positives at ranks 1 and 3
    Vector row(4);
    row << 0.9, 0.7, 0.5, 0.3;
    std::vector<bool> mask = {true, false, true, false};
    CHECK(recall_at_k(row, mask, std::nullopt, 2) == doctest::Approx(0.5));
    CHECK(recall_at_k(row, mask, std::nullopt, 10) == doctest::Approx(1.0));
}

TEST_CASE("recall_at_k requires a positive") {
    Vector row(2);
    row << 0.9, 0.7;
    std::vector<bool> mask = {false, false};
    CHECK_THROWS_AS(recall_at_k(row, mask, std::nullopt, 1), NoPositives);
}

TEST_CASE("benchmark r@k fires iff some positive is within k") {
    Vector row(4);
    row << 0.9, 0.8, 0.5, 0.3;
    std::vector<bool> mask = {false, false, true, false};  // best positive at rank 3
    CHECK(benchmark_r_at_k(row, mask, std::nullopt, 4) == 1);
    CHECK(benchmark_r_at_k(row, mask, std::nullopt, 2) == 0);
}

TEST_CASE("r@k equals recall_at_k > 0 and dominates it") {
    Rng rng(22);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform_int(12));
        const Vector row = random_row(rng, n, trial % 2 == 0);
        std::vector<bool> mask(static_cast<std::size_t>(n), false);
        int n_pos = 0;
        for (int i = 0; i < n; ++i) {
            mask[static_cast<std::size_t>(i)] = rng.uniform() < 0.4;
            n_pos += mask[static_cast<std::size_t>(i)] ? 1 : 0;
        }
        if (n_pos == 0) {
            mask[0] = true;
        }
        const int k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        const double recall = recall_at_k(row, mask, std::nullopt, k);
        const int r = benchmark_r_at_k(row, mask, std::nullopt, k);
        CHECK(r == (recall > 0.0 ? 1 : 0));
        CHECK(static_cast<double>(r) >= recall);
    }
}

TEST_CASE("recall_at_k is monotone in k") {
    Rng rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_int(10));
        const Vector row = random_row(rng, n, trial % 3 == 0);
        std::vector<bool> mask(static_cast<std::size_t>(n), false);
        mask[0] = mask[static_cast<std::size_t>(n - 1)] = true;
        double prev = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double r = recall_at_k(row, mask, std::nullopt, k);
            CHECK(r >= prev);
            prev = r;
        }
        CHECK(prev == doctest::Approx(1.0));
    }
}

TEST_CASE("mean_average_precision on tiny fixtures") {
    {
        // single positive at rank 1
        Matrix sims(1, 3);
        sims << 0.0, 0.9, 0.2;
        Labels labels = {0, 0, 1};
        CHECK(mean_average_precision(sims, labels, true) == doctest::Approx(1.0));
    }
    {
        // single positive at rank 2 of 2
        Matrix sims(1, 3);
        sims << 0.0, 0.2, 0.9;
        Labels labels = {0, 0, 1};
        CHECK(mean_average_precision(sims, labels, true) == doctest::Approx(0.5));
    }
}

TEST_CASE("mean_average_precision equals the ranked-walk oracle") {
    Rng rng(24);
    for (int trial = 0; trial < 3000; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform_int(10));
        const Vector row = random_row(rng, n, trial % 2 == 0);
        std::vector<bool> mask(static_cast<std::size_t>(n), false);
        int n_pos = 0;
        for (int i = 0; i < n; ++i) {
            mask[static_cast<std::size_t>(i)] = rng.uniform() < 0.4;
            n_pos += mask[static_cast<std::size_t>(i)] ? 1 : 0;
        }
        if (n_pos == 0) mask[static_cast<std::size_t>(n - 1)] = true;

        // one-query matrix, no self exclusion: label row 0's positives
        Matrix sims(1, n);
        sims.row(0) = row.transpose();
        Labels labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            labels[static_cast<std::size_t>(i)] = mask[static_cast<std::size_t>(i)] ? 7 : i + 100;
        Labels with_query = labels;
        // query row uses class 7; build full square matrix with query included
        Matrix full(n + 1, n + 1);
        full.setZero();
        full.row(0).tail(n) = row.transpose();
        Labels full_labels;
        full_labels.push_back(7);
        for (int i = 0; i < n; ++i) full_labels.push_back(labels[static_cast<std::size_t>(i)]);
        // restrict to the first query only by passing a 1-row view
        const Matrix one_row = full.topRows(1);
        const double got = mean_average_precision(one_row, full_labels, true);
        Vector padded(n + 1);
        padded(0) = 0.0;
        padded.tail(n) = row;
        std::vector<bool> padded_mask;
        padded_mask.push_back(true);  // query class, excluded via self
        for (int i = 0; i < n; ++i) padded_mask.push_back(mask[static_cast<std::size_t>(i)]);
        const double expected = ap_by_ranked_walk(padded, padded_mask, 0);
        CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("evaluate is perfect on orthogonal clusters") {
    Matrix e(4, 2);
    e << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0;
    Labels labels = {0, 0, 1, 1};
    const MetricTable t = evaluate(e, labels, KSet({1, 2}));
    CHECK(t.r_at_1 == doctest::Approx(1.0));
    CHECK(t.map == doctest::Approx(1.0));
    CHECK(t.recall_for(1) == doctest::Approx(1.0));
    CHECK(t.r_for(2) == doctest::Approx(1.0));
}

TEST_CASE("evaluate matches the analytic chance level under shuffled labels") {
    Rng rng(25);
    const Dataset d = generate_synthetic(30, 20, 16, 0.1, 77);
    Labels shuffled = d.labels;
    rng.shuffle(shuffled);
    const Matrix rows = l2_normalize_rows(d.features);
    const MetricTable t = evaluate(rows, shuffled, KSet({1}));

    // chance: the top neighbor is positive with probability (m_c - 1)/(N - 1)
    const int n = d.size();
    std::vector<int> counts(31, 0);
    for (int c : shuffled) counts[static_cast<std::size_t>(c)]++;
    double p_mean = 0.0;
    double var = 0.0;
    for (int c : shuffled) {
        const double p = static_cast<double>(counts[static_cast<std::size_t>(c)] - 1) /
                         static_cast<double>(n - 1);
        p_mean += p;
        var += p * (1.0 - p);
    }
    p_mean /= n;
    const double se = std::sqrt(var) / n;
    CHECK(std::abs(t.r_at_1 - p_mean) <= 3.0 * se);
}

TEST_CASE("evaluate is independent of row tiling") {
    Rng rng(26);
    Matrix e(37, 8);
    for (int i = 0; i < 37; ++i)
        for (int j = 0; j < 8; ++j) e(i, j) = rng.normal();
    e = l2_normalize_rows(e);
    Labels labels(37);
    for (int i = 0; i < 37; ++i) labels[static_cast<std::size_t>(i)] = i % 9;

    const MetricTable one = evaluate(e, labels, KSet({1, 4}), 64);
    const MetricTable tiled = evaluate(e, labels, KSet({1, 4}), 1);
    const MetricTable tiled5 = evaluate(e, labels, KSet({1, 4}), 5);
    CHECK(one.r_at_1 == tiled.r_at_1);
    CHECK(one.map == tiled.map);
    CHECK(one.recall[0] == tiled.recall[0]);
    CHECK(one.recall[1] == tiled5.recall[1]);
    CHECK(one.r_at[1] == tiled5.r_at[1]);
}

TEST_CASE("metrics are invariant under per-row monotone transforms") {
    Rng rng(27);
    Matrix e(20, 6);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 6; ++j) e(i, j) = rng.normal();
    e = l2_normalize_rows(e);
    Labels labels(20);
    for (int i = 0; i < 20; ++i) labels[static_cast<std::size_t>(i)] = i % 5;

    Matrix sims = similarity_matrix(e, e);
    const double map_before = mean_average_precision(sims, labels, true);
    Matrix warped = sims;
    for (int q = 0; q < 20; ++q) {
        const double scale = 0.5 + rng.uniform();  // strictly increasing map per row
        const double shift = rng.uniform(-2.0, 2.0);
        for (int z = 0; z < 20; ++z)
            warped(q, z) = scale * std::exp(sims(q, z) * 0.7) + shift;
    }
    CHECK(mean_average_precision(warped, labels, true) ==
          doctest::Approx(map_before).epsilon(1e-12));

    for (int q = 0; q < 20; ++q) {
        for (int x = 0; x < 20; ++x) {
            if (x == q) continue;
            CHECK(exact_rank(sims.row(q).transpose(), x, q) ==
                  exact_rank(warped.row(q).transpose(), x, q));
        }
    }
}
