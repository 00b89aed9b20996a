#include "rankloss/sampler.hpp"

namespace rankloss {

DatasetIndex DatasetIndex::from_labels(const Labels& labels) {
    DatasetIndex index;
    for (std::size_t i = 0; i < labels.size(); ++i)
        index.by_class[labels[i]].push_back(static_cast<int>(i));
    index.total = static_cast<int>(labels.size());
    return index;
}

DatasetIndex filter_small_classes(const DatasetIndex& index, int m) {
    if (m < 2) throw BadParam("per-class count m must be >= 2");
    DatasetIndex out;
    for (const auto& [cls, members] : index.by_class) {
        if (static_cast<int>(members.size()) >= m) {
            out.by_class[cls] = members;
            out.total += static_cast<int>(members.size());
        }
    }
    if (out.by_class.empty()) throw EmptyAfterFilter();
    return out;
}

std::vector<int> class_balanced_batch(const DatasetIndex& index, int batch_size,
                                      int per_class, Rng& rng) {
    if (per_class < 1 || batch_size < 1) throw BadParam("batch_size and per_class must be >= 1");
    if (batch_size % per_class != 0)
        throw NotDivisible("batch size " + std::to_string(batch_size) +
                           " is not divisible by per-class count " + std::to_string(per_class));
    const int num_classes = batch_size / per_class;
    if (num_classes > index.num_classes())
        throw TooFewClasses("batch needs " + std::to_string(num_classes) + " classes, index has " +
                            std::to_string(index.num_classes()));

    std::vector<int> class_ids;
    class_ids.reserve(index.by_class.size());
    for (const auto& [cls, members] : index.by_class) {
        if (static_cast<int>(members.size()) < per_class)
            throw TooFewClasses("class " + std::to_string(cls) + " has fewer than " +
                                std::to_string(per_class) + " examples; filter first");
        class_ids.push_back(cls);
    }

    const std::vector<int> picks =
        rng.sample_without_replacement(static_cast<int>(class_ids.size()), num_classes);

    std::vector<int> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int p : picks) {
        const std::vector<int>& members = index.by_class.at(class_ids[static_cast<std::size_t>(p)]);
        const std::vector<int> within =
            rng.sample_without_replacement(static_cast<int>(members.size()), per_class);
        for (int w : within) batch.push_back(members[static_cast<std::size_t>(w)]);
    }
    return batch;
}

}  // namespace rankloss
