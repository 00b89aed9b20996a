#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankloss/trainer.hpp"

namespace rankloss {

/// Key=value training configuration, one pair per line, '#' comments.
/// Unknown keys are errors. Defaults follow the fixed training recipe:
/// tau1=1, tau2=0.01, 4 samples per class, k set chosen by the simix flag.
struct CliConfig {
    std::uint64_t seed = 0;
    int dim = 16;
    int input_dim = 0;  // 0 = take from the dataset
    int batch_size = 64;
    int samples_per_class = 4;
    double tau1 = 1.0;
    double tau2 = 0.01;
    std::vector<int> k_set;  // empty = default for the simix mode
    bool simix = false;
    double lr = 0.01;
    int iterations = 200;
    int chunk_size = 64;
    std::string encoder = "linear";  // "linear" or "mlp:<hidden>"
    std::string loss = "rsk";        // "rsk" or "contrastive"
    double lr_decay_factor = 1.0;
    std::vector<int> lr_decay_steps;
    int eval_every = 25;
};

CliConfig parse_config_text(const std::string& text, const std::string& origin);
CliConfig parse_config_file(const std::string& path);

/// Resolve a CliConfig against a dataset's feature dimension into a validated
/// TrainConfig. Throws ConfigError on any inconsistency.
TrainConfig make_train_config(const CliConfig& cfg, int dataset_dim);

}  // namespace rankloss
