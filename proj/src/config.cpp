#include "rankloss/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace rankloss {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(where + ": expected true or false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v, const std::string& where) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(where + ": empty list entry");
        out.push_back(static_cast<int>(parse_long(item, where)));
    }
    if (out.empty()) throw ConfigError(where + ": empty list");
    return out;
}

}  // namespace

CliConfig parse_config_text(const std::string& text, const std::string& origin) {
    CliConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where = origin + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": missing key");
        if (value.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError(where + ": duplicate key '" + key + "'");

        if (key == "seed") {
            const long s = parse_long(value, where);
            if (s < 0) throw ConfigError(where + ": seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "dim") {
            cfg.dim = static_cast<int>(parse_long(value, where));
        } else if (key == "input_dim") {
            cfg.input_dim = static_cast<int>(parse_long(value, where));
        } else if (key == "batch_size") {
            cfg.batch_size = static_cast<int>(parse_long(value, where));
        } else if (key == "samples_per_class") {
            cfg.samples_per_class = static_cast<int>(parse_long(value, where));
        } else if (key == "tau1") {
            cfg.tau1 = parse_double(value, where);
        } else if (key == "tau2") {
            cfg.tau2 = parse_double(value, where);
        } else if (key == "k_set") {
            cfg.k_set = parse_int_list(value, where);
        } else if (key == "simix") {
            cfg.simix = parse_bool(value, where);
        } else if (key == "lr") {
            cfg.lr = parse_double(value, where);
        } else if (key == "iterations") {
            cfg.iterations = static_cast<int>(parse_long(value, where));
        } else if (key == "chunk_size") {
            cfg.chunk_size = static_cast<int>(parse_long(value, where));
        } else if (key == "encoder") {
            cfg.encoder = value;
        } else if (key == "loss") {
            cfg.loss = value;
        } else if (key == "lr_decay_factor") {
            cfg.lr_decay_factor = parse_double(value, where);
        } else if (key == "lr_decay_steps") {
            cfg.lr_decay_steps = parse_int_list(value, where);
        } else if (key == "eval_every") {
            cfg.eval_every = static_cast<int>(parse_long(value, where));
        } else {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

CliConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

TrainConfig make_train_config(const CliConfig& cfg, int dataset_dim) {
    TrainConfig out;
    try {
        out.batch_size = cfg.batch_size;
        out.per_class = cfg.samples_per_class;
        out.iterations = cfg.iterations;
        out.simix = cfg.simix;
        out.loss.tau1 = Temperature(cfg.tau1);
        out.loss.tau2 = Temperature(cfg.tau2);
        out.loss.ks = cfg.k_set.empty() ? default_kset(cfg.simix) : KSet(cfg.k_set);
        out.loss.clipped = true;
        out.lr = cfg.lr;
        out.schedule.factor = cfg.lr_decay_factor;
        out.schedule.milestones = cfg.lr_decay_steps;
        out.chunk_size = cfg.chunk_size;
        out.seed = cfg.seed;
        out.eval_every = cfg.eval_every;
        out.embed_dim = cfg.dim;
    } catch (const BadParam& e) {
        throw ConfigError(e.what());
    }

    if (cfg.loss == "rsk") {
        out.kind = LossKind::RSK;
    } else if (cfg.loss == "contrastive") {
        out.kind = LossKind::Contrastive;
    } else {
        throw ConfigError("loss must be rsk or contrastive, got '" + cfg.loss + "'");
    }

    if (cfg.encoder == "linear") {
        out.arch = Arch::Linear;
        out.hidden_dim = 0;
    } else if (cfg.encoder.rfind("mlp:", 0) == 0) {
        out.arch = Arch::Mlp;
        const std::string h = cfg.encoder.substr(4);
        out.hidden_dim = static_cast<int>(parse_long(h, "encoder"));
        if (out.hidden_dim < 1) throw ConfigError("encoder: mlp hidden width must be positive");
    } else {
        throw ConfigError("encoder must be linear or mlp:<hidden>, got '" + cfg.encoder + "'");
    }

    if (cfg.dim < 1) throw ConfigError("dim must be positive");
    if (cfg.batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (cfg.samples_per_class < 2) throw ConfigError("samples_per_class must be >= 2");
    if (cfg.batch_size % cfg.samples_per_class != 0)
        throw ConfigError("batch_size must be divisible by samples_per_class");
    if (cfg.iterations < 0) throw ConfigError("iterations must be >= 0");
    if (cfg.chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (cfg.eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (!(cfg.lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(cfg.lr_decay_factor > 0.0)) throw ConfigError("lr_decay_factor must be positive");

    if (cfg.input_dim != 0 && cfg.input_dim != dataset_dim)
        throw ConfigError("config input_dim=" + std::to_string(cfg.input_dim) +
                          " but dataset has dim=" + std::to_string(dataset_dim));
    return out;
}

}  // namespace rankloss
