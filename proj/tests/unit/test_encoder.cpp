#include "ternhash/encoder.hpp"

#include "../helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace ternhash;
using namespace thtest;

TEST_CASE("shrink definition") {
    Vec x(2), tau(2);
    x << 2, -3;
    tau << 1, 1;
    Vec out = shrink(x, tau);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == -2.0);

    Vec x3(3), tau3(3);
    x3 << 0.5, -0.2, 0.9;
    tau3 << 0.6, 0.6, 0.6;
    Vec out3 = shrink(x3, tau3);
    CHECK(out3[0] == 0.0);
    CHECK(out3[1] == 0.0);
    CHECK(out3[2] == doctest::Approx(0.3));

    Rng rng(3);
    Vec any = random_vec(rng, 7, 2.0);
    Vec zero_tau = Vec::Zero(7);
    CHECK(shrink(any, zero_tau) == any);

    CHECK_THROWS_AS(shrink(x, tau3), DimensionError);
}

TEST_CASE("shrink is odd and 1-Lipschitz") {
    Rng rng(4);
    for (int it = 0; it < 200; ++it) {
        Eigen::Index n = 1 + Eigen::Index(rng.index(8));
        Vec x = random_vec(rng, n, 3.0);
        Vec y = random_vec(rng, n, 3.0);
        Vec tau(n);
        for (Eigen::Index i = 0; i < n; ++i) tau[i] = rng.uniform();
        CHECK(shrink(-x, tau) == -shrink(x, tau));
        CHECK((shrink(x, tau) - shrink(y, tau)).norm() <= (x - y).norm() + 1e-12);
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = shrink(x, tau)[i];
            CHECK(std::abs(s) <= std::abs(x[i]));
            CHECK(s * x[i] >= 0.0);
        }
    }
}

TEST_CASE("forward with zero projection gives the all-zero code") {
    EncoderParams p;
    p.proj = Mat::Zero(5, 3);
    p.inhib = Mat::Zero(5, 5);
    p.thresholds = Vec::Zero(5);
    p.steepness = 3.0;
    p.iters = 2;
    Vec x(3);
    x << 1, -2, 3;
    ForwardTrace t = forward(p, x);
    CHECK(t.output.isZero());
    CHECK(t.final_state().isZero());
}

TEST_CASE("degenerate configuration recovers the linear sign family") {
    Rng rng(5);
    EncoderParams p = random_params(rng, 4, 6, 0, 60.0);
    p.thresholds = Vec::Zero(6);
    Vec x = random_vec(rng, 4);
    ForwardTrace t = forward(p, x);
    Vec drive = p.proj * x;
    for (Eigen::Index i = 0; i < 6; ++i) {
        if (std::abs(drive[i]) > 0.05) {
            CHECK(t.output[i] == doctest::Approx(drive[i] > 0 ? 1.0 : -1.0).epsilon(1e-2));
        }
    }
}

TEST_CASE("forward matches a straight-line reference recurrence") {
    Rng rng(6);
    EncoderParams p = random_params(rng, 4, 6, 2, 2.5);
    Vec x = random_vec(rng, 4);
    ForwardTrace t = forward(p, x);

    // independent plain-loop evaluation
    const int n = 4, m = 6;
    std::vector<double> b(m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) b[size_t(i)] += p.proj(i, j) * x[j];
    auto shrink_ref = [&](const std::vector<double>& u) {
        std::vector<double> z(m);
        for (int i = 0; i < m; ++i) {
            double mag = std::abs(u[size_t(i)]) - p.thresholds[i];
            z[size_t(i)] = mag > 0 ? (u[size_t(i)] > 0 ? mag : -mag) : 0.0;
        }
        return z;
    };
    std::vector<double> z = shrink_ref(b);
    for (int step = 0; step < 2; ++step) {
        std::vector<double> u(m);
        for (int i = 0; i < m; ++i) {
            u[size_t(i)] = b[size_t(i)];
            for (int j = 0; j < m; ++j) u[size_t(i)] += p.inhib(i, j) * z[size_t(j)];
        }
        z = shrink_ref(u);
    }
    for (int i = 0; i < m; ++i) {
        CHECK(t.final_state()[i] == doctest::Approx(z[size_t(i)]).epsilon(1e-12));
        CHECK(t.output[i] == doctest::Approx(std::tanh(2.5 * z[size_t(i)])).epsilon(1e-12));
    }
}

TEST_CASE("zero thresholds and zero inhibition reduce to one matrix pass") {
    Rng rng(7);
    for (int iters : {0, 1, 3}) {
        EncoderParams p = random_params(rng, 5, 4, iters, 2.0);
        p.thresholds = Vec::Zero(4);
        p.inhib = Mat::Zero(4, 4);
        Vec x = random_vec(rng, 5);
        ForwardTrace t = forward(p, x);
        Vec expect = (2.0 * (p.proj * x)).array().tanh();
        CHECK((t.output - expect).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("forward outputs stay inside the open unit interval") {
    Rng rng(8);
    for (int it = 0; it < 50; ++it) {
        EncoderParams p = random_params(rng, 6, 8, 1, 3.0);
        Vec x = random_vec(rng, 6);
        ForwardTrace t = forward(p, x);
        for (Eigen::Index i = 0; i < t.output.size(); ++i) {
            CHECK(std::abs(t.output[i]) < 1.0);
        }
    }
}

TEST_CASE("init_params on orthonormal training vectors zeroes the inhibition") {
    Mat training = Mat::Identity(6, 6);
    EncoderParams p = init_params(training, 6, 1, 3.0, 42);
    CHECK(p.inhib.lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(p.thresholds.isZero());
}

TEST_CASE("init_params normalizes rows and skips zero vectors") {
    Rng rng(9);
    Mat training = random_mat(rng, 20, 5);
    training.row(3).setZero();
    training.row (11).setZero();
    EncoderParams p = init_params(training, 8, 1, 3.0, 7);
    for (Eigen::Index i = 0; i < p.proj.rows(); ++i)
        CHECK(p.proj.row(i).norm() == doctest::Approx(1.0).epsilon(1e-9));

    // deterministic given seed
    EncoderParams q = init_params(training, 8, 1, 3.0, 7);
    CHECK(p.proj == q.proj);
    CHECK(p.inhib == q.inhib);

    CHECK_THROWS_AS(init_params(Mat::Zero(10, 5), 8, 1, 3.0, 7), DataError);
    CHECK_THROWS_AS(init_params(random_mat(rng, 4, 5), 8, 1, 3.0, 7), DataError);
}

TEST_CASE("power iteration matches a dense eigensolver") {
    Rng rng(10);
    Mat pool = random_mat(rng, 20, 12);
    EncoderParams p = init_params(pool, 8, 1, 3.0, 3);
    Mat gram = p.proj * p.proj.transpose();

    double from_power = power_iteration_max_eigenvalue(gram, 1e-8);
    Eigen::SelfAdjointEigenSolver<Mat> solver(gram);
    double from_solver = solver.eigenvalues().maxCoeff();
    CHECK(from_power == doctest::Approx(from_solver).epsilon(1e-5));

    // inhibition has the ISTA form I - gram / L
    Mat recon = Mat::Identity(8, 8) - p.inhib;
    double lipschitz = power_iteration_max_eigenvalue(p.proj * p.proj.transpose(), 1e-6);
    CHECK((recon * lipschitz - p.proj * p.proj.transpose()).lpNorm<Eigen::Infinity>() < 1e-6);
}
