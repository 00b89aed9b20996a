#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankloss/config.hpp"
#include "rankloss/dataio.hpp"
#include "rankloss/gradcheck.hpp"
#include "rankloss/retrieval_eval.hpp"
#include "rankloss/sampler.hpp"
#include "rankloss/trainer.hpp"

namespace {

constexpr const char* kMetricsSchema = "# rankloss-kit metrics v1";

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

using rankloss::Arch;
using rankloss::CliConfig;
using rankloss::Dataset;
using rankloss::EncoderParams;
using rankloss::Matrix;
using rankloss::TrainConfig;
using rankloss::TrainReport;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void write_metrics_csv(const std::string& path, const TrainConfig& cfg,
                       const TrainReport& report) {
    std::ofstream out(path);
    if (!out) throw rankloss::IoError("cannot write metrics file: " + path);
    out << kMetricsSchema << "\n";
    out << "iteration,loss,val_r@1";
    for (int k : cfg.loss.ks.ks) out << ",val_recall@" << k;
    out << ",elapsed_ms\n";
    for (const auto& row : report.rows) {
        out << row.iteration << ',' << format_double(row.loss) << ',';
        if (row.val) out << format_double(row.val->r_at_1);
        for (std::size_t i = 0; i < cfg.loss.ks.size(); ++i) {
            out << ',';
            if (row.val) out << format_double(row.val->recall[i]);
        }
        out << ',' << format_double(row.elapsed_ms) << "\n";
    }
    if (!out) throw rankloss::IoError("write failed: " + path);
}

rankloss::Checkpoint to_checkpoint(const EncoderParams& params, std::uint64_t seed,
                                   std::uint64_t iteration) {
    rankloss::Checkpoint ckpt;
    ckpt.arch = params.arch;
    ckpt.input_dim = params.input_dim;
    ckpt.hidden_dim = params.hidden_dim;
    ckpt.output_dim = params.output_dim;
    ckpt.params = params.mats;
    ckpt.seed = seed;
    ckpt.iteration = iteration;
    return ckpt;
}

EncoderParams from_checkpoint(const rankloss::Checkpoint& ckpt) {
    EncoderParams params;
    params.arch = ckpt.arch;
    params.input_dim = ckpt.input_dim;
    params.hidden_dim = ckpt.hidden_dim;
    params.output_dim = ckpt.output_dim;
    params.mats = ckpt.params;
    return params;
}

struct GenArgs {
    int classes = 8;
    int per_class = 4;
    int dim = 8;
    double noise = 0.05;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenArgs& args) {
    const Dataset d = rankloss::generate_synthetic(args.classes, args.per_class, args.dim,
                                                   args.noise, args.seed);
    rankloss::save_dataset(d, args.out);
    std::cout << "wrote " << args.out << ": N=" << d.size() << " classes=" << args.classes
              << " dim=" << d.dim() << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string config;
    std::string data;
    std::string val;
    std::string out_model;
    std::string out_metrics;
};

int cmd_train(const TrainArgs& args) {
    const CliConfig cli_cfg = rankloss::parse_config_file(args.config);
    const Dataset train = rankloss::load_dataset(args.data);
    Dataset val;
    const bool has_val = !args.val.empty();
    if (has_val) val = rankloss::load_dataset(args.val);

    const TrainConfig cfg = rankloss::make_train_config(cli_cfg, train.dim());
    if (cfg.simix) {
        std::cout << "simix: batch " << cfg.batch_size << " -> expanded batch "
                  << rankloss::simix_expanded_size(cfg.batch_size, cfg.per_class) << "\n";
    }

    auto [params, report] = rankloss::train_loop(train, has_val ? &val : nullptr, cfg);

    if (!args.out_model.empty()) {
        rankloss::save_checkpoint(
            to_checkpoint(params, cfg.seed, static_cast<std::uint64_t>(cfg.iterations)),
            args.out_model);
        std::cout << "wrote model " << args.out_model << "\n";
    }
    if (!args.out_metrics.empty()) {
        write_metrics_csv(args.out_metrics, cfg, report);
        std::cout << "wrote metrics " << args.out_metrics << "\n";
    }
    if (!report.rows.empty())
        std::cout << "final loss " << format_double(report.rows.back().loss) << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string model;
    std::string data;
    std::vector<int> ks = {1, 2, 4, 8};
    std::vector<std::string> metrics = {"r", "recall", "map"};
    std::string out_csv;
};

int cmd_eval(const EvalArgs& args) {
    const rankloss::Checkpoint ckpt = rankloss::load_checkpoint(args.model);
    const Dataset data = rankloss::load_dataset(args.data);
    if (ckpt.input_dim != data.dim())
        throw rankloss::DimensionMismatch("checkpoint expects input dim " +
                                          std::to_string(ckpt.input_dim) + ", dataset has dim " +
                                          std::to_string(data.dim()));

    const EncoderParams params = from_checkpoint(ckpt);
    const Matrix embedded = rankloss::encoder_forward(params, data.features, false).first;
    std::vector<int> ks = args.ks;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const rankloss::MetricTable table =
        rankloss::evaluate(embedded, data.labels, rankloss::KSet(ks));

    const bool want_r = std::count(args.metrics.begin(), args.metrics.end(), "r") > 0;
    const bool want_recall = std::count(args.metrics.begin(), args.metrics.end(), "recall") > 0;
    const bool want_map = std::count(args.metrics.begin(), args.metrics.end(), "map") > 0;

    std::ofstream csv;
    if (!args.out_csv.empty()) {
        csv.open(args.out_csv);
        if (!csv) throw rankloss::IoError("cannot write csv: " + args.out_csv);
        csv << kMetricsSchema << "\nmetric,k,value\n";
    }
    auto emit = [&](const std::string& metric, int k, double v) {
        if (k > 0)
            std::cout << metric << "@" << k << " " << format_metric(v) << "\n";
        else
            std::cout << metric << " " << format_metric(v) << "\n";
        if (csv.is_open()) csv << metric << ',' << (k > 0 ? std::to_string(k) : "") << ','
                               << format_double(v) << "\n";
    };
    if (want_r)
        for (std::size_t i = 0; i < table.ks.size(); ++i) emit("r", table.ks[i], table.r_at[i]);
    if (want_recall)
        for (std::size_t i = 0; i < table.ks.size(); ++i)
            emit("recall", table.ks[i], table.recall[i]);
    if (want_map) emit("mAP", 0, table.map);
    return kExitOk;
}

struct GradcheckArgs {
    int dim = 8;
    int batch = 32;
    double tau1 = 1.0;
    double tau2 = 0.1;
    double eps = 1e-5;
    std::uint64_t seed = 0;
    bool simix = false;
};

int cmd_gradcheck(const GradcheckArgs& args) {
    const rankloss::GradCheckReport report = rankloss::end_to_end_gradcheck(
        args.dim, args.batch, args.tau1, args.tau2, args.eps, args.seed, args.simix);
    std::cout << "checked " << report.n_params << " parameters, max relative error "
              << format_double(report.max_rel_err) << " (threshold "
              << format_double(report.threshold) << ")\n";
    std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
    return report.pass ? kExitOk : kExitRuntime;
}

struct SweepArgs {
    std::string config;
    std::string data;
    std::string val;
    std::string param;
    std::string values;
    int seeds = 3;
    std::string out;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_sweep(const SweepArgs& args) {
    if (args.param != "batch_size" && args.param != "tau1" && args.param != "k_set")
        throw rankloss::ConfigError("unknown sweep param '" + args.param +
                                    "' (batch_size, tau1, k_set)");
    if (args.seeds < 1) throw rankloss::ConfigError("seeds must be >= 1");

    const CliConfig base = rankloss::parse_config_file(args.config);
    const Dataset train = rankloss::load_dataset(args.data);
    const Dataset val = rankloss::load_dataset(args.val);

    // k_set values are themselves comma lists, so they are separated by ';'
    const std::vector<std::string> values =
        args.param == "k_set" ? split(args.values, ';') : split(args.values, ',');
    if (values.empty()) throw rankloss::ConfigError("no sweep values given");

    std::ofstream out(args.out);
    if (!out) throw rankloss::IoError("cannot write sweep csv: " + args.out);
    out << kMetricsSchema << "\n";
    out << "param,value,seed,loss,r@1,mAP\n";

    for (const std::string& value : values) {
        CliConfig cli_cfg = base;
        std::string label = value;
        if (args.param == "batch_size") {
            cli_cfg.batch_size = static_cast<int>(std::stol(value));
        } else if (args.param == "tau1") {
            cli_cfg.tau1 = std::stod(value);
        } else {
            cli_cfg.k_set.clear();
            for (const std::string& k : split(value, ','))
                cli_cfg.k_set.push_back(static_cast<int>(std::stol(k)));
            std::string joined;
            for (std::size_t i = 0; i < cli_cfg.k_set.size(); ++i)
                joined += (i ? "|" : "") + std::to_string(cli_cfg.k_set[i]);
            label = joined;
        }

        std::vector<double> losses, r1s, maps;
        for (int s = 0; s < args.seeds; ++s) {
            TrainConfig cfg = rankloss::make_train_config(cli_cfg, train.dim());
            cfg.seed = cli_cfg.seed + static_cast<std::uint64_t>(s);
            auto [params, report] = rankloss::train_loop(train, nullptr, cfg);
            const Matrix embedded =
                rankloss::encoder_forward(params, val.features, false).first;
            const rankloss::MetricTable table =
                rankloss::evaluate(embedded, val.labels, cfg.loss.ks);
            const double loss = report.rows.empty() ? 0.0 : report.rows.back().loss;
            out << args.param << ',' << label << ',' << s << ',' << format_double(loss) << ','
                << format_double(table.r_at_1) << ',' << format_double(table.map) << "\n";
            losses.push_back(loss);
            r1s.push_back(table.r_at_1);
            maps.push_back(table.map);
        }
        out << args.param << ',' << label << ",median," << format_double(median(losses)) << ','
            << format_double(median(r1s)) << ',' << format_double(median(maps)) << "\n";
        std::cout << args.param << "=" << label << " median r@1 "
                  << format_metric(median(r1s)) << "\n";
    }
    if (!out) throw rankloss::IoError("write failed: " + args.out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recall@k surrogate loss toolkit: synthetic data, training, evaluation"};
    app.name("rankloss");
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset file");
    gen_cmd->add_option("--classes", gen.classes, "number of classes")->check(CLI::Range(2, 1 << 20));
    gen_cmd->add_option("--per-class", gen.per_class, "examples per class")
        ->check(CLI::Range(2, 1 << 20));
    gen_cmd->add_option("--dim", gen.dim, "feature dimension")->check(CLI::Range(1, 1 << 16));
    gen_cmd->add_option("--noise", gen.noise, "noise stddev per coordinate")
        ->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--out", gen.out, "output dataset path")->required();

    TrainArgs train;
    CLI::App* train_cmd = app.add_subcommand("train", "train an encoder");
    train_cmd->add_option("--config", train.config, "key=value config file")->required();
    train_cmd->add_option("--data", train.data, "training dataset")->required();
    train_cmd->add_option("--val", train.val, "validation dataset");
    train_cmd->add_option("--out-model", train.out_model, "checkpoint output path");
    train_cmd->add_option("--out-metrics", train.out_metrics, "metrics CSV output path");

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--model", eval.model, "checkpoint path")->required();
    eval_cmd->add_option("--data", eval.data, "dataset path")->required();
    eval_cmd->add_option("--k", eval.ks, "k values")->delimiter(',');
    eval_cmd->add_option("--metrics", eval.metrics, "metrics to report: r, recall, map")
        ->delimiter(',');
    eval_cmd->add_option("--out-csv", eval.out_csv, "also write metrics to this CSV");

    GradcheckArgs gradcheck;
    CLI::App* gc_cmd =
        app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
    gc_cmd->add_option("--dim", gradcheck.dim, "embedding dimension");
    gc_cmd->add_option("--batch", gradcheck.batch, "batch size");
    gc_cmd->add_option("--tau1", gradcheck.tau1, "rank sigmoid temperature");
    gc_cmd->add_option("--tau2", gradcheck.tau2, "similarity sigmoid temperature");
    gc_cmd->add_option("--eps", gradcheck.eps, "finite difference step");
    gc_cmd->add_option("--seed", gradcheck.seed, "instance seed");
    gc_cmd->add_option("--simix", gradcheck.simix, "check through the SiMix extension");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "rerun training across one parameter");
    sweep_cmd->add_option("--config", sweep.config, "base config file")->required();
    sweep_cmd->add_option("--data", sweep.data, "training dataset")->required();
    sweep_cmd->add_option("--val", sweep.val, "evaluation dataset")->required();
    sweep_cmd->add_option("--param", sweep.param, "batch_size, tau1, or k_set")->required();
    sweep_cmd
        ->add_option("--values", sweep.values,
                     "comma-separated values (';'-separated k lists for k_set)")
        ->required();
    sweep_cmd->add_option("--seeds", sweep.seeds, "seeds per value");
    sweep_cmd->add_option("--out", sweep.out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (train_cmd->parsed()) return cmd_train(train);
        if (eval_cmd->parsed()) return cmd_eval(eval);
        if (gc_cmd->parsed()) return cmd_gradcheck(gradcheck);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    } catch (const rankloss::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const rankloss::BadParam& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const rankloss::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
