#include "ternhash/encoder.hpp"

#include <cmath>

namespace ternhash {

void EncoderParams::validate() const {
    check_dim(inhib.rows() == proj.rows() && inhib.cols() == proj.rows(),
              "EncoderParams: inhibition matrix must be code_len x code_len");
    check_dim(thresholds.size() == proj.rows(), "EncoderParams: threshold length mismatch");
    check_arg(steepness > 0.0, "EncoderParams: steepness must be positive");
    check_arg(iters >= 0, "EncoderParams: iters must be nonnegative");
    if (!proj.allFinite() || !inhib.allFinite() || !thresholds.allFinite())
        throw NumericError("EncoderParams: non-finite entries");
    for (Eigen::Index i = 0; i < thresholds.size(); ++i)
        check_arg(thresholds[i] >= 0.0, "EncoderParams: thresholds must be nonnegative");
}

Vec shrink(const Vec& x, const Vec& tau) {
    check_dim(x.size() == tau.size(), "shrink: length mismatch");
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double mag = std::abs(x[i]) - tau[i];
        out[i] = mag > 0.0 ? (x[i] > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

ForwardTrace forward(const EncoderParams& params, const Vec& x) {
    check_dim(x.size() == params.input_dim(), "forward: input dimension mismatch");

    ForwardTrace t;
    t.input = x;
    t.drive = params.proj * x;
    t.state.reserve(size_t(params.iters) + 1);
    t.pre.reserve(size_t(params.iters));
    t.state.push_back(shrink(t.drive, params.thresholds));
    for (int step = 1; step <= params.iters; ++step) {
        t.pre.push_back(t.drive + params.inhib * t.state.back());
        t.state.push_back(shrink(t.pre.back(), params.thresholds));
    }
    t.output = (params.steepness * t.state.back()).array().tanh();
    return t;
}

Mat encode_batch(const EncoderParams& params, const Mat& data) {
    Mat out(data.rows(), params.code_len());
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        out.row(i) = forward(params, data.row(i).transpose()).output.transpose();
    return out;
}

double power_iteration_max_eigenvalue(const Mat& sym, double tol, int max_iter) {
    check_dim(sym.rows() == sym.cols(), "power_iteration: matrix must be square");
    const Eigen::Index n = sym.rows();
    // deterministic pseudo-random start to avoid orthogonal-start stalls
    Rng rng(0x5eedULL);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
    v.normalize();

    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vec w = sym * v;
        double norm = w.norm();
        if (norm < 1e-300) return 0.0;  // zero matrix
        v = w / norm;
        double next = v.dot(sym * v);
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(std::abs(next), 1e-30)) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

EncoderParams init_params(const Mat& training, Eigen::Index m, int iters, double steepness,
                          uint64_t seed) {
    check_arg(m >= 1, "init_params: code length must be >= 1");
    const Eigen::Index n = training.cols();

    // candidate rows with nonzero norm
    std::vector<Eigen::Index> usable;
    usable.reserve(size_t(training.rows()));
    for (Eigen::Index i = 0; i < training.rows(); ++i) {
        if (training.row(i).norm() > 0.0) usable.push_back(i);
    }
    if (Eigen::Index(usable.size()) < m)
        throw DataError("init_params: fewer than code_len nonzero training vectors");

    Rng rng(seed);
    std::vector<size_t> picks = rng.sample(usable.size(), size_t(m));

    EncoderParams p;
    p.proj = Mat(m, n);
    for (Eigen::Index r = 0; r < m; ++r) {
        Vec row = training.row(usable[picks[size_t(r)]]).transpose();
        p.proj.row(r) = (row / row.norm()).transpose();
    }

    Mat gram = p.proj * p.proj.transpose();
    double lipschitz = power_iteration_max_eigenvalue(gram, 1e-6);
    if (lipschitz <= 0.0) throw NumericError("init_params: degenerate projection gram matrix");
    p.inhib = Mat::Identity(m, m) - gram / lipschitz;
    p.thresholds = Vec::Zero(m);
    p.steepness = steepness;
    p.iters = iters;
    p.validate();
    return p;
}

}  // namespace ternhash
