#pragma once

#include <map>
#include <vector>

#include "rankloss/rng.hpp"
#include "rankloss/types.hpp"

namespace rankloss {

/// class id -> example indices, used by the batch sampler and the splitter.
struct DatasetIndex {
    std::map<int, std::vector<int>> by_class;
    int total = 0;

    static DatasetIndex from_labels(const Labels& labels);
    int num_classes() const { return static_cast<int>(by_class.size()); }
};

/// Drop classes with fewer than m examples. Throws EmptyAfterFilter if
/// nothing remains.
DatasetIndex filter_small_classes(const DatasetIndex& index, int m);

/// Class-balanced batch: M/m distinct classes sampled without replacement,
/// m examples each (also without replacement within a class).
std::vector<int> class_balanced_batch(const DatasetIndex& index, int batch_size,
                                      int per_class, Rng& rng);

}  // namespace rankloss
