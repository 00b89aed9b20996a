#include "rankloss/dataio.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "rankloss/numerics.hpp"
#include "rankloss/rng.hpp"

namespace rankloss {

namespace {

constexpr char kCheckpointMagic[8] = {'R', 'S', 'K', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw CorruptCheckpoint("checkpoint truncated");
    return v;
}

}  // namespace

Dataset generate_synthetic(int classes, int per_class, int dim, double noise,
                           std::uint64_t seed) {
    if (classes < 2) throw BadParam("need at least 2 classes");
    if (per_class < 2) throw BadParam("need at least 2 examples per class");
    if (dim < 1) throw BadParam("feature dimension must be positive");
    if (noise < 0.0) throw BadParam("noise must be nonnegative");

    Rng rng(seed);
    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(classes) * per_class, dim);
    d.labels.resize(static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class));
    d.meta.seed = seed;
    {
        std::ostringstream params;
        params << "classes=" << classes << " per_class=" << per_class << " dim=" << dim
               << " noise=" << noise;
        d.meta.generator_params = params.str();
    }

    Eigen::Index row = 0;
    for (int c = 0; c < classes; ++c) {
        Vector center(dim);
        for (int t = 0; t < dim; ++t) center(t) = rng.normal();
        center = l2_normalize(center);
        for (int e = 0; e < per_class; ++e) {
            for (int t = 0; t < dim; ++t) d.features(row, t) = center(t) + noise * rng.normal();
            d.labels[static_cast<std::size_t>(row)] = c;
            ++row;
        }
    }
    return d;
}

std::pair<Dataset, Dataset> split_by_classes(const Dataset& d) {
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < d.size(); ++i) by_class[d.labels[static_cast<std::size_t>(i)]].push_back(i);
    if (by_class.size() < 2) throw TooFewClasses("split needs at least 2 classes");

    const std::size_t n_train_classes = by_class.size() / 2;
    std::vector<int> train_rows;
    std::vector<int> eval_rows;
    std::size_t idx = 0;
    for (const auto& [cls, members] : by_class) {
        auto& dst = idx < n_train_classes ? train_rows : eval_rows;
        dst.insert(dst.end(), members.begin(), members.end());
        ++idx;
    }

    auto take = [&d](const std::vector<int>& rows, const char* tag) {
        Dataset out;
        out.features.resize(static_cast<Eigen::Index>(rows.size()), d.features.cols());
        out.labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.features.row(static_cast<Eigen::Index>(i)) = d.features.row(rows[i]);
            out.labels[i] = d.labels[static_cast<std::size_t>(rows[i])];
        }
        out.meta = d.meta;
        out.meta.name = d.meta.name.empty() ? tag : d.meta.name + ":" + tag;
        return out;
    };
    return {take(train_rows, "train"), take(eval_rows, "eval")};
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ":1: missing header");
    long n = 0;
    long p = 0;
    {
        std::istringstream header(line);
        if (!(header >> n >> p) || n < 0 || p < 1)
            throw ParseError(path + ":1: header must be \"N p\"");
        std::string extra;
        if (header >> extra) throw ParseError(path + ":1: trailing token '" + extra + "'");
    }

    Dataset d;
    d.features.resize(n, p);
    d.labels.resize(static_cast<std::size_t>(n));
    d.meta.name = path;
    for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw ParseError(path + ":" + std::to_string(i + 2) + ": expected " +
                             std::to_string(n) + " rows, file ends after " + std::to_string(i));
        std::istringstream ls(line);
        long cls = 0;
        std::string tok;
        if (!(ls >> tok))
            throw ParseError(path + ":" + std::to_string(i + 2) + ": empty row");
        try {
            std::size_t used = 0;
            cls = std::stol(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(i + 2) + ": bad class id '" + tok + "'");
        }
        if (cls < 0)
            throw ParseError(path + ":" + std::to_string(i + 2) + ": negative class id");
        d.labels[static_cast<std::size_t>(i)] = static_cast<int>(cls);
        for (long j = 0; j < p; ++j) {
            if (!(ls >> tok))
                throw ParseError(path + ":" + std::to_string(i + 2) + ": expected " +
                                 std::to_string(p) + " features, got " + std::to_string(j));
            try {
                std::size_t used = 0;
                d.features(i, j) = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(i + 2) + ": bad feature token '" +
                                 tok + "'");
            }
        }
        std::string extra;
        if (ls >> extra)
            throw ParseError(path + ":" + std::to_string(i + 2) + ": trailing token '" + extra +
                             "'");
    }
    return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file: " + path);
    out << d.size() << " " << d.dim() << "\n";
    char buf[32];
    for (int i = 0; i < d.size(); ++i) {
        out << d.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < d.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", d.features(i, j));
            out << ' ' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_u64(out, ckpt.arch == Arch::Linear ? 0 : 1);
    write_u64(out, static_cast<std::uint64_t>(ckpt.input_dim));
    write_u64(out, static_cast<std::uint64_t>(ckpt.hidden_dim));
    write_u64(out, static_cast<std::uint64_t>(ckpt.output_dim));
    write_u64(out, ckpt.seed);
    write_u64(out, ckpt.iteration);
    write_u64(out, ckpt.params.size());
    for (const Matrix& w : ckpt.params) {
        write_u64(out, static_cast<std::uint64_t>(w.rows()));
        write_u64(out, static_cast<std::uint64_t>(w.cols()));
        out.write(reinterpret_cast<const char*>(w.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(w.size())));
    }
    if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in) throw CorruptCheckpoint("checkpoint shorter than its magic");
    if (std::memcmp(magic, kCheckpointMagic, 7) != 0)
        throw CorruptCheckpoint("not a checkpoint file");
    if (magic[7] != kCheckpointMagic[7]) {
        throw VersionMismatch(std::string("checkpoint version '") + magic[7] +
                              "' not supported, expected '1'");
    }

    Checkpoint ckpt;
    const std::uint64_t arch = read_u64(in);
    if (arch > 1) throw CorruptCheckpoint("unknown architecture tag");
    ckpt.arch = arch == 0 ? Arch::Linear : Arch::Mlp;
    ckpt.input_dim = static_cast<int>(read_u64(in));
    ckpt.hidden_dim = static_cast<int>(read_u64(in));
    ckpt.output_dim = static_cast<int>(read_u64(in));
    ckpt.seed = read_u64(in);
    ckpt.iteration = read_u64(in);
    const std::uint64_t count = read_u64(in);
    if (count > 16) throw CorruptCheckpoint("implausible parameter count");
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t rows = read_u64(in);
        const std::uint64_t cols = read_u64(in);
        if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
            throw CorruptCheckpoint("implausible parameter shape");
        Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        in.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(sizeof(double) * rows * cols));
        if (!in) throw CorruptCheckpoint("checkpoint truncated inside parameter blob");
        ckpt.params.push_back(std::move(w));
    }
    // nothing may trail the last blob
    char extra;
    if (in.read(&extra, 1)) throw CorruptCheckpoint("trailing bytes after parameters");
    return ckpt;
}

}  // namespace rankloss
