#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rankloss/dataio.hpp"
#include "rankloss/numerics.hpp"
#include "rankloss/retrieval_eval.hpp"
#include "rankloss/trainer.hpp"

using namespace rankloss;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rankloss_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("generate_synthetic counts rows and validates parameters") {
    const Dataset d = generate_synthetic(8, 4, 8, 0.05, 7);
    CHECK(d.size() == 32);
    CHECK(d.dim() == 8);
    CHECK_THROWS_AS(generate_synthetic(1, 4, 8, 0.05, 7), BadParam);
    CHECK_THROWS_AS(generate_synthetic(8, 1, 8, 0.05, 7), BadParam);
    CHECK_THROWS_AS(generate_synthetic(8, 4, 8, -0.1, 7), BadParam);
}

TEST_CASE("generate_synthetic is deterministic per seed") {
    const Dataset a = generate_synthetic(6, 3, 5, 0.2, 99);
    const Dataset b = generate_synthetic(6, 3, 5, 0.2, 99);
    const Dataset c = generate_synthetic(6, 3, 5, 0.2, 100);
    CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero noise duplicates within-class features exactly") {
    const Dataset d = generate_synthetic(5, 2, 6, 0.0, 3);
    for (int c = 0; c < 5; ++c)
        CHECK((d.features.row(2 * c) - d.features.row(2 * c + 1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero-noise data trains to perfect r@1 on its train split") {
    // per_class=2 keeps duplicate positives unique, so the tie rule cannot
    // push the only positive below rank 1
    const Dataset d = generate_synthetic(8, 2, 6, 0.0, 5);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.per_class = 2;
    cfg.iterations = 10;
    cfg.embed_dim = 4;
    cfg.lr = 0.01;
    cfg.seed = 1;
    auto [params, report] = train_loop(d, nullptr, cfg);
    const Matrix embedded = encoder_forward(params, d.features, false).first;
    const MetricTable t = evaluate(embedded, d.labels, KSet({1}));
    CHECK(t.r_at_1 == 1.0);
}

TEST_CASE("1-NN on raw features is the harness ceiling for the quickstart data") {
    const Dataset d = generate_synthetic(128, 20, 32, 0.1, 400);
    const Matrix rows = l2_normalize_rows(d.features);
    const MetricTable t = evaluate(rows, d.labels, KSet({1}));
    // regression floor measured once on this seed; cosine 1-NN is essentially
    // perfect at this noise level
    CHECK(t.r_at_1 >= 0.999);
}

TEST_CASE("split_by_classes sends the first half of class ids to train") {
    const Dataset d = generate_synthetic(4, 3, 5, 0.1, 11);
    auto [train, eval] = split_by_classes(d);
    std::set<int> train_classes(train.labels.begin(), train.labels.end());
    std::set<int> eval_classes(eval.labels.begin(), eval.labels.end());
    CHECK(train_classes == std::set<int>{0, 1});
    CHECK(eval_classes == std::set<int>{2, 3});
}

TEST_CASE("split_by_classes floors the train half on odd class counts") {
    const Dataset d = generate_synthetic(5, 2, 4, 0.1, 12);
    auto [train, eval] = split_by_classes(d);
    std::set<int> train_classes(train.labels.begin(), train.labels.end());
    std::set<int> eval_classes(eval.labels.begin(), eval.labels.end());
    CHECK(train_classes.size() == 2);
    CHECK(eval_classes.size() == 3);
    for (int c : train_classes) CHECK(eval_classes.count(c) == 0);
    CHECK(train.size() + eval.size() == d.size());
}

TEST_CASE("dataset text round trip") {
    TempDir tmp;
    const Dataset d = generate_synthetic(4, 3, 7, 0.3, 21);
    save_dataset(d, tmp.file("d.tsv"));
    const Dataset back = load_dataset(tmp.file("d.tsv"));
    REQUIRE(back.size() == d.size());
    REQUIRE(back.dim() == d.dim());
    CHECK(back.labels == d.labels);
    CHECK((back.features - d.features).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dataset loader reports the offending line") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("short.tsv"));
        out << "3 2\n0 0.5 0.25\n1 0.125 0.75\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(tmp.file("short.tsv")),
                         doctest::Contains("short.tsv:4"), ParseError);
    {
        std::ofstream out(tmp.file("token.tsv"));
        out << "1 2\n0 0.5 zebra\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(tmp.file("token.tsv")), doctest::Contains("zebra"),
                         ParseError);
    {
        std::ofstream out(tmp.file("header.tsv"));
        out << "nope\n";
    }
    CHECK_THROWS_AS(load_dataset(tmp.file("header.tsv")), ParseError);
    CHECK_THROWS_AS(load_dataset(tmp.file("missing.tsv")), IoError);
}

TEST_CASE("checkpoint round trip is byte identical") {
    TempDir tmp;
    Checkpoint ckpt;
    ckpt.arch = Arch::Mlp;
    ckpt.input_dim = 4;
    ckpt.hidden_dim = 6;
    ckpt.output_dim = 3;
    ckpt.seed = 123456789;
    ckpt.iteration = 200;
    Rng rng(31);
    for (auto [r, c] : {std::pair{4, 6}, {1, 6}, {6, 3}, {1, 3}}) {
        Matrix w(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) w(i, j) = rng.normal();
        ckpt.params.push_back(w);
    }
    save_checkpoint(ckpt, tmp.file("a.ckpt"));
    const Checkpoint back = load_checkpoint(tmp.file("a.ckpt"));
    save_checkpoint(back, tmp.file("b.ckpt"));
    CHECK(slurp(tmp.file("a.ckpt")) == slurp(tmp.file("b.ckpt")));
    CHECK(back.arch == Arch::Mlp);
    CHECK(back.seed == 123456789);
    CHECK(back.iteration == 200);
    REQUIRE(back.params.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK((back.params[i] - ckpt.params[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncated checkpoints are corrupt, future versions mismatch") {
    TempDir tmp;
    Checkpoint ckpt;
    ckpt.arch = Arch::Linear;
    ckpt.input_dim = 2;
    ckpt.output_dim = 2;
    ckpt.params = {Matrix::Identity(2, 2), Matrix::Zero(1, 2)};
    save_checkpoint(ckpt, tmp.file("ok.ckpt"));

    const std::string bytes = slurp(tmp.file("ok.ckpt"));
    {
        std::ofstream out(tmp.file("trunc.ckpt"), std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("trunc.ckpt")), CorruptCheckpoint);

    {
        std::string future = bytes;
        future[7] = '2';
        std::ofstream out(tmp.file("future.ckpt"), std::ios::binary);
        out.write(future.data(), static_cast<std::streamsize>(future.size()));
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("future.ckpt")), VersionMismatch);

    {
        std::ofstream out(tmp.file("junk.ckpt"), std::ios::binary);
        out << "definitely not a checkpoint";
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("junk.ckpt")), CorruptCheckpoint);
}
