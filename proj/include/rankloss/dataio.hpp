#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rankloss/encoder.hpp"
#include "rankloss/types.hpp"

namespace rankloss {

struct DatasetMeta {
    std::string name;
    std::uint64_t seed = 0;
    std::string generator_params;
};

/// Feature matrix with one labeled example per row.
struct Dataset {
    Matrix features;
    Labels labels;
    DatasetMeta meta;

    int size() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

/// Synthetic clusters: class centers drawn uniformly on the unit sphere,
/// examples are center + noise * standard normal per coordinate.
Dataset generate_synthetic(int classes, int per_class, int dim, double noise,
                           std::uint64_t seed);

/// Open-set split: classes sorted by id, first half (floor) to train, the
/// rest to eval. Class sets are disjoint.
std::pair<Dataset, Dataset> split_by_classes(const Dataset& d);

/// Text format. Line 1: "N p". Then N lines: class id followed by p features.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& d, const std::string& path);

/// Versioned binary container for encoder parameters, magic "RSKCKPT1".
struct Checkpoint {
    Arch arch = Arch::Linear;
    int input_dim = 0;
    int hidden_dim = 0;
    int output_dim = 0;
    std::vector<Matrix> params;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rankloss
