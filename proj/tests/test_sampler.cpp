#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "rankloss/rng.hpp"
#include "rankloss/sampler.hpp"

using namespace rankloss;

namespace {

Labels labels_with_sizes(const std::vector<int>& sizes) {
    Labels labels;
    for (std::size_t c = 0; c < sizes.size(); ++c)
        for (int i = 0; i < sizes[c]; ++i) labels.push_back(static_cast<int>(c));
    return labels;
}

}  // namespace

TEST_CASE("filter_small_classes drops classes below the per-class count") {
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes({3, 4, 5}));
    const DatasetIndex filtered = filter_small_classes(index, 4);
    CHECK(filtered.by_class.count(0) == 0);
    CHECK(filtered.by_class.count(1) == 1);
    CHECK(filtered.by_class.count(2) == 1);
    CHECK(filtered.total == 9);
}

TEST_CASE("filter_small_classes is the identity when all classes are large enough") {
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes({4, 6}));
    const DatasetIndex filtered = filter_small_classes(index, 4);
    CHECK(filtered.by_class == index.by_class);
    CHECK(filtered.total == index.total);
}

TEST_CASE("filter_small_classes rejects an empty result") {
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes({2, 3}));
    CHECK_THROWS_AS(filter_small_classes(index, 4), EmptyAfterFilter);
}

TEST_CASE("class_balanced_batch draws m per class over M/m classes") {
    Rng rng(51);
    std::vector<int> sizes(1200, 6);
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes(sizes));
    const std::vector<int> batch = class_balanced_batch(index, 4000, 4, rng);
    REQUIRE(batch.size() == 4000);

    Labels all = labels_with_sizes(sizes);
    std::map<int, int> per_class;
    std::set<int> unique(batch.begin(), batch.end());
    CHECK(unique.size() == batch.size());  // no duplicate example
    for (int idx : batch) per_class[all[static_cast<std::size_t>(idx)]]++;
    CHECK(per_class.size() == 1000);
    for (const auto& [cls, count] : per_class) CHECK(count == 4);
}

TEST_CASE("class_balanced_batch covers every class when the batch spans them all") {
    Rng rng(52);
    std::vector<int> sizes(98, 10);
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes(sizes));
    const std::vector<int> batch = class_balanced_batch(index, 392, 4, rng);
    Labels all = labels_with_sizes(sizes);
    std::set<int> classes;
    for (int idx : batch) classes.insert(all[static_cast<std::size_t>(idx)]);
    CHECK(classes.size() == 98);
}

TEST_CASE("class_balanced_batch validates capacity and divisibility") {
    Rng rng(53);
    const DatasetIndex one_class = DatasetIndex::from_labels(labels_with_sizes({8}));
    CHECK_THROWS_AS(class_balanced_batch(one_class, 8, 4, rng), TooFewClasses);
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes({8, 8}));
    CHECK_THROWS_AS(class_balanced_batch(index, 7, 4, rng), NotDivisible);
}

TEST_CASE("batches are deterministic per seed and fresh per call") {
    std::vector<int> sizes(40, 8);
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes(sizes));
    Rng a(99);
    Rng b(99);
    const std::vector<int> first_a = class_balanced_batch(index, 32, 4, a);
    const std::vector<int> first_b = class_balanced_batch(index, 32, 4, b);
    CHECK(first_a == first_b);
    const std::vector<int> second_a = class_balanced_batch(index, 32, 4, a);
    CHECK(first_a != second_a);
}

TEST_CASE("every batch satisfies the loss precondition when m >= 2") {
    Rng rng(54);
    std::vector<int> sizes(12, 5);
    const DatasetIndex index = DatasetIndex::from_labels(labels_with_sizes(sizes));
    Labels all = labels_with_sizes(sizes);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<int> batch = class_balanced_batch(index, 8, 2, rng);
        std::map<int, int> per_class;
        for (int idx : batch) per_class[all[static_cast<std::size_t>(idx)]]++;
        CHECK(per_class.size() == 4);
        for (const auto& [cls, count] : per_class) CHECK(count == 2);
    }
}
