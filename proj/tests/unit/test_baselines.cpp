#include "ternhash/baselines.hpp"

#include "../helpers.hpp"
#include "ternhash/synth.hpp"

#include <doctest.h>

#include <Eigen/QR>

using namespace ternhash;
using namespace thtest;

namespace {

// orthonormal basis from a seeded random matrix
Mat orthonormal_basis(Rng& rng, Eigen::Index n) {
    Mat raw = random_mat(rng, n, n);
    Eigen::HouseholderQR<Mat> qr(raw);
    Mat q = qr.householderQ();
    return q;
}

// data + pairs whose positive/negative difference second moments are
// exactly basis * diag(pos_eigs|neg_eigs) * basis^T
struct SpectralFixture {
    Mat data;
    std::vector<PairSample> pairs;
};

SpectralFixture make_spectral_fixture(const Mat& basis, const Vec& pos_eigs, const Vec& neg_eigs) {
    const Eigen::Index n = basis.rows();
    SpectralFixture fx;
    fx.data = Mat::Zero(2 * n + 1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        fx.data.row(i) = std::sqrt(double(n) * pos_eigs[i]) * basis.col(i).transpose();
        fx.data.row(n + i) = std::sqrt(double(n) * neg_eigs[i]) * basis.col(i).transpose();
        fx.pairs.push_back({uint32_t(i), uint32_t(2 * n), 1});
        fx.pairs.push_back({uint32_t(n + i), uint32_t(2 * n), 0});
    }
    return fx;
}

// largest principal angle between two row-orthonormal subspaces
double subspace_angle(const Mat& a, const Mat& b) {
    Eigen::JacobiSVD<Mat> svd(a * b.transpose());
    double cos_min = svd.singularValues().minCoeff();
    return std::acos(std::clamp(cos_min, -1.0, 1.0));
}

}  // namespace

TEST_CASE("diffhash recovers a constructed eigenbasis") {
    Rng rng(51);
    const Eigen::Index n = 8, m = 3;
    Mat basis = orthonormal_basis(rng, n);
    Vec pos_eigs(n), neg_eigs(n);
    // difference spectrum pos - neg: {-7,-5,-3,-1,1,3,5,7}; smallest three
    // live on basis columns 0,1,2
    for (Eigen::Index i = 0; i < n; ++i) {
        double diff = -7.0 + 2.0 * double(i);
        pos_eigs[i] = 4.0 + std::max(0.0, diff);
        neg_eigs[i] = pos_eigs[i] - diff;
    }
    SpectralFixture fx = make_spectral_fixture(basis, pos_eigs, neg_eigs);
    DiffHashResult res = diffhash_fit(fx.data, fx.pairs, m);

    Mat expected(m, n);
    for (Eigen::Index i = 0; i < m; ++i) expected.row(i) = basis.col(i).transpose();
    CHECK(subspace_angle(res.params.proj, expected) < 1e-6);

    Mat gram = res.params.proj * res.params.proj.transpose();
    CHECK((gram - Mat::Identity(m, m)).lpNorm<Eigen::Infinity>() < 1e-8);

    // objective equals the sum of the m smallest difference eigenvalues
    double objective = 0;
    for (Eigen::Index i = 0; i < m; ++i) objective += res.spectrum[i];
    CHECK(objective == doctest::Approx(-7.0 - 5.0 - 3.0).epsilon(1e-8));
}

TEST_CASE("zero positive scatter points at the strongest negative directions") {
    Rng rng(52);
    const Eigen::Index n = 6, m = 2;
    Mat basis = orthonormal_basis(rng, n);
    Vec neg_eigs(n);
    for (Eigen::Index i = 0; i < n; ++i) neg_eigs[i] = 1.0 + double(i);

    // negatives measured against the zero row; positives are duplicated
    // points, so their difference covariance is exactly zero
    Mat data = Mat::Zero(n + 2, n);
    std::vector<PairSample> pairs;
    for (Eigen::Index i = 0; i < n; ++i) {
        data.row(i) = std::sqrt(double(n) * neg_eigs[i]) * basis.col(i).transpose();
        pairs.push_back({uint32_t(i), uint32_t(n), 0});
    }
    data.row(n + 1) = data.row(n);  // both zero rows
    for (int k = 0; k < int(n); ++k) pairs.push_back({uint32_t(n), uint32_t(n + 1), 1});

    DiffHashResult res = diffhash_fit(data, pairs, m);
    Mat expected(m, n);
    expected.row(0) = basis.col(n - 1).transpose();
    expected.row(1) = basis.col(n - 2).transpose();
    CHECK(subspace_angle(res.params.proj, expected) < 1e-6);
}

TEST_CASE("diffhash argument validation") {
    Rng rng(53);
    Mat data = random_mat(rng, 10, 4);
    std::vector<PairSample> pairs = {{0, 1, 1}, {2, 3, 0}};
    CHECK_THROWS_AS(diffhash_fit(data, pairs, 5), ArgumentError);
    CHECK_THROWS_AS(diffhash_fit(data, {}, 2), ArgumentError);

    // rank-deficient covariances warn but still fit
    DiffHashResult res = diffhash_fit(data, pairs, 2);
    CHECK(res.warnings.size() == 2);
}

TEST_CASE("diffhash bias separates a one-dimensional split") {
    // projected values cluster at -1 and +1; positives stay within a side,
    // negatives straddle; the best single-bit threshold sits near 0
    Mat data(6, 1);
    data << -1.2, -1.0, -0.8, 0.8, 1.0, 1.2;
    std::vector<PairSample> pairs = {
        {0, 1, 1}, {1, 2, 1}, {3, 4, 1}, {4, 5, 1},
        {0, 3, 0}, {1, 4, 0}, {2, 5, 0},
    };
    DiffHashResult res = diffhash_fit(data, pairs, 1);
    // sign(p*x + a) must classify all pairs correctly, whatever the sign of p
    auto bit = [&](double x) { return res.params.proj(0, 0) * x + res.params.offset[0] > 0; };
    for (const auto& p : pairs) {
        CHECK((bit(data(p.a, 0)) == bit(data(p.b, 0))) == (p.label == 1));
    }
}

TEST_CASE("nnhash_loss values and symmetry") {
    Vec y(2), y2(2);
    y << 1, 0;
    y2 << 0, 0;
    CHECK(nnhash_loss(y, y, 1, 2.0) == 0.0);
    CHECK(nnhash_loss(y, y2, 0, 2.0) == doctest::Approx(0.5));

    Vec far(2);
    far << 5, 5;
    CHECK(nnhash_loss(y, far, 0, 2.0) == 0.0);

    Rng rng(54);
    for (int it = 0; it < 100; ++it) {
        Vec a = random_vec(rng, 4), b = random_vec(rng, 4);
        for (int label : {0, 1})
            CHECK(nnhash_loss(a, b, label, 1.5) ==
                  doctest::Approx(nnhash_loss(b, a, label, 1.5)).epsilon(1e-12));
    }
}

TEST_CASE("nnhash gradient matches finite differences") {
    Rng rng(55);
    int checked = 0, passed = 0;
    while (checked < 20) {
        const Eigen::Index n = 4, m = 3;
        LinearHashParams p{random_mat(rng, m, n, 0.5), random_vec(rng, m, 0.2)};
        Vec xa = random_vec(rng, n), xb = random_vec(rng, n);
        int label = int(rng.index(2));
        double margin = 0.5 + 2.0 * rng.uniform();
        double steepness = 2.0;
        if (!nnhash_kink_free(p, steepness, xa, xb, label, margin)) continue;

        Mat gproj;
        Vec goffset;
        nnhash_pair_gradient(p, steepness, xa, xb, label, margin, gproj, goffset);

        auto objective = [&](const LinearHashParams& q) {
            return nnhash_loss(linear_forward(q, xa, steepness),
                               linear_forward(q, xb, steepness), label, margin);
        };
        double worst = 0;
        LinearHashParams work = p;
        auto probe = [&](double* slot, double analytic) {
            double orig = *slot;
            double h = 1e-5 * std::max(1.0, std::abs(orig));
            *slot = orig + h;
            double hi = objective(work);
            *slot = orig - h;
            double lo = objective(work);
            *slot = orig;
            double numeric = (hi - lo) / (2 * h);
            double denom = std::max(std::abs(numeric), std::abs(analytic));
            if (denom > 1e-7)
                worst = std::max(worst, std::abs(numeric - analytic) / denom);
        };
        for (Eigen::Index k = 0; k < work.proj.size(); ++k)
            probe(work.proj.data() + k, gproj.data()[k]);
        for (Eigen::Index k = 0; k < m; ++k) probe(&work.offset[k], goffset[k]);

        ++checked;
        if (worst < 1e-4) ++passed;
    }
    CHECK(passed >= 19);
}

TEST_CASE("nnhash training separates clusters and saturates") {
    SynthData data = make_clusters({2, 8, 120, 0.4, 56});
    auto pairs = make_pairs_from_labels(data.labels, 300, 300, 57);
    NnHashConfig cfg;
    cfg.m = 6;
    cfg.margin = 3.0;
    cfg.steepness = 3.0;
    cfg.sgd.learning_rate = 0.05;
    cfg.sgd.max_epochs = 40;
    cfg.sgd.seed = 58;
    NnHashTrainResult tr = nnhash_train(data.points, pairs, cfg);
    CHECK(tr.log.back().mean_pos_dist < tr.log.back().mean_neg_dist);

    // a steep output slope drives trained codes to the hypercube corners
    size_t saturated = 0, total = 0;
    for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
        Vec y = linear_forward(tr.params, data.points.row(i).transpose(), 50.0);
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            saturated += std::abs(y[j]) > 0.99;
            ++total;
        }
    }
    CHECK(double(saturated) / double(total) > 0.95);
}

TEST_CASE("degenerate encoder equals the linear family") {
    Rng rng(59);
    EncoderParams enc = random_params(rng, 5, 4, 0, 2.5);
    enc.thresholds = Vec::Zero(4);
    LinearHashParams lin{enc.proj, Vec::Zero(4)};
    for (int it = 0; it < 20; ++it) {
        Vec x = random_vec(rng, 5);
        Vec from_encoder = forward(enc, x).output;
        Vec from_linear = linear_forward(lin, x, 2.5);
        CHECK((from_encoder - from_linear).lpNorm<Eigen::Infinity>() < 1e-14);
    }
}
