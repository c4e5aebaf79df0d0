#include "ternhash/io.hpp"

#include "../helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace ternhash;
using namespace thtest;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("ternhash_io_" + std::to_string(uint64_t(::getpid())));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)), {});
}

}  // namespace

TEST_CASE("matrix container round trip at float precision") {
    TempDir dir;
    Rng rng(91);
    Mat m = random_mat(rng, 17, 5);
    save_matrix(m, dir.file("m.bin"));
    Mat back = load_matrix(dir.file("m.bin"));
    REQUIRE(back.rows() == 17);
    REQUIRE(back.cols() == 5);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            CHECK(back(i, j) == double(float(m(i, j))));

    // write -> read -> write is byte identical
    save_matrix(back, dir.file("m2.bin"));
    CHECK(slurp(dir.file("m.bin")) == slurp(dir.file("m2.bin")));

    CHECK_THROWS_AS(load_matrix(dir.file("missing.bin")), DataError);
    std::ofstream(dir.file("junk.bin")) << "not a matrix";
    CHECK_THROWS_AS(load_matrix(dir.file("junk.bin")), DataError);
}

TEST_CASE("csv import") {
    TempDir dir;
    std::ofstream(dir.file("t.csv")) << "# comment\n1.5,2,3\n4,5,-6.25\n";
    Mat m = load_matrix_csv(dir.file("t.csv"));
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    CHECK(m(0, 0) == 1.5);
    CHECK(m(1, 2) == -6.25);

    std::ofstream(dir.file("ragged.csv")) << "1,2\n3\n";
    CHECK_THROWS_AS(load_matrix_csv(dir.file("ragged.csv")), DataError);
}

TEST_CASE("labels and pairs round trip") {
    TempDir dir;
    std::vector<int> labels = {3, 1, 4, 1, 5, -2};
    save_labels(labels, dir.file("l.txt"));
    CHECK(load_labels(dir.file("l.txt")) == labels);

    std::vector<PairSample> pairs = {{0, 3, 1}, {2, 5, 0}, {1, 4, 1}};
    save_pairs(pairs, dir.file("p.txt"));
    auto back = load_pairs(dir.file("p.txt"));
    REQUIRE(back.size() == pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        CHECK(back[i].a == pairs[i].a);
        CHECK(back[i].b == pairs[i].b);
        CHECK(back[i].label == pairs[i].label);
    }

    std::ofstream(dir.file("bad.txt")) << "1 2 7\n";
    CHECK_THROWS_AS(load_pairs(dir.file("bad.txt")), DataError);
}

TEST_CASE("codes container round trip") {
    TempDir dir;
    Rng rng(92);
    std::vector<TernaryCode> codes;
    for (int i = 0; i < 40; ++i) {
        std::vector<int8_t> s(13);
        for (auto& v : s) v = int8_t(int(rng.index(3)) - 1);
        codes.push_back(TernaryCode(std::move(s)));
    }
    save_codes(codes, dir.file("c.bin"));
    auto back = load_codes(dir.file("c.bin"));
    REQUIRE(back.size() == codes.size());
    for (size_t i = 0; i < codes.size(); ++i) CHECK(back[i] == codes[i]);

    save_codes(back, dir.file("c2.bin"));
    CHECK(slurp(dir.file("c.bin")) == slurp(dir.file("c2.bin")));
}

TEST_CASE("encoder checkpoint round trip with sidecar") {
    TempDir dir;
    Rng rng(93);
    Checkpoint ckpt;
    ckpt.method = Method::Ista;
    ckpt.encoder = random_params(rng, 6, 4, 2, 2.25);
    ckpt.steepness = 2.25;
    CheckpointMeta meta{1234, "cafecafecafecafe"};
    save_checkpoint(ckpt, meta, dir.file("e.ckpt"));

    Checkpoint back = load_checkpoint(dir.file("e.ckpt"));
    REQUIRE(back.method == Method::Ista);
    CHECK(back.encoder->proj == ckpt.encoder->proj);
    CHECK(back.encoder->inhib == ckpt.encoder->inhib);
    CHECK(back.encoder->thresholds == ckpt.encoder->thresholds);
    CHECK(back.encoder->steepness == 2.25);
    CHECK(back.encoder->iters == 2);

    CheckpointMeta meta_back = load_checkpoint_meta(dir.file("e.ckpt"));
    CHECK(meta_back.seed == 1234);
    CHECK(meta_back.config_hash == "cafecafecafecafe");

    // encoding through the checkpoint matches the raw encoder
    Vec x = random_vec(rng, 6);
    CHECK(back.encode(x) == forward(*ckpt.encoder, x).output);
}

TEST_CASE("linear checkpoint round trip keeps the method tag") {
    TempDir dir;
    Rng rng(94);
    for (Method method : {Method::NnHash, Method::DiffHash}) {
        Checkpoint ckpt;
        ckpt.method = method;
        ckpt.linear = LinearHashParams{random_mat(rng, 5, 7), random_vec(rng, 5)};
        ckpt.steepness = 4.0;
        save_checkpoint(ckpt, {}, dir.file("l.ckpt"));
        Checkpoint back = load_checkpoint(dir.file("l.ckpt"));
        CHECK(back.method == method);
        CHECK(back.linear->proj == ckpt.linear->proj);
        CHECK(back.linear->offset == ckpt.linear->offset);
        Vec x = random_vec(rng, 7);
        CHECK(back.encode(x) == linear_forward(*ckpt.linear, x, 4.0));
    }
}

TEST_CASE("train log format") {
    TempDir dir;
    std::vector<EpochStats> log = {{0, 1.25, 0.5, 0.1, 2.0, 0.05}, {1, 1.0, 0.4, 0.09, 2.1, 0.049}};
    save_train_log(log, dir.file("log.tsv"));
    std::ifstream is(dir.file("log.tsv"));
    std::string header, line0;
    std::getline(is, header);
    std::getline(is, line0);
    CHECK(header == "epoch\tmean_loss\tmean_sparsity\tmean_pos_d1\tmean_neg_d1\tlr");
    CHECK(line0 == "0\t1.25\t0.5\t0.1\t2\t0.05");
}

TEST_CASE("method names round trip") {
    for (Method m : {Method::Ista, Method::NnHash, Method::DiffHash}) {
        auto parsed = method_from_name(method_name(m));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == m);
    }
    CHECK(!method_from_name("nope").has_value());
}
