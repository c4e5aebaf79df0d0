#include "ternhash/baselines.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ternhash {

Vec linear_forward(const LinearHashParams& p, const Vec& x, double steepness) {
    check_dim(x.size() == p.input_dim(), "linear_forward: input dimension mismatch");
    return ((p.proj * x + p.offset) * steepness).array().tanh();
}

Mat linear_encode_batch(const LinearHashParams& p, const Mat& data, double steepness) {
    Mat out(data.rows(), p.code_len());
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        out.row(i) = linear_forward(p, data.row(i).transpose(), steepness).transpose();
    return out;
}

namespace {

// Per-dimension bias: pick the threshold on the projected line that
// minimizes (positives split) + (negatives not split), sweeping the
// midpoints between consecutive projected values.
double fit_bias_dimension(const std::vector<double>& values,
                          const std::vector<std::pair<double, double>>& pos_intervals,
                          const std::vector<std::pair<double, double>>& neg_intervals) {
    std::vector<double> sorted_vals = values;
    std::sort(sorted_vals.begin(), sorted_vals.end());
    sorted_vals.erase(std::unique(sorted_vals.begin(), sorted_vals.end()), sorted_vals.end());

    std::vector<double> candidates;
    candidates.push_back(sorted_vals.front() - 1.0);
    for (size_t i = 0; i + 1 < sorted_vals.size(); ++i)
        candidates.push_back(0.5 * (sorted_vals[i] + sorted_vals[i + 1]));

    // a pair is split by t when t lies strictly inside its value interval
    auto build = [](const std::vector<std::pair<double, double>>& iv) {
        std::vector<double> lo, hi;
        lo.reserve(iv.size());
        hi.reserve(iv.size());
        for (auto& p : iv) {
            lo.push_back(std::min(p.first, p.second));
            hi.push_back(std::max(p.first, p.second));
        }
        std::sort(lo.begin(), lo.end());
        std::sort(hi.begin(), hi.end());
        return std::make_pair(lo, hi);
    };
    auto [pos_lo, pos_hi] = build(pos_intervals);
    auto [neg_lo, neg_hi] = build(neg_intervals);
    auto split_count = [](const std::vector<double>& lo, const std::vector<double>& hi, double t) {
        ptrdiff_t started = std::lower_bound(lo.begin(), lo.end(), t) - lo.begin();
        ptrdiff_t ended = std::upper_bound(hi.begin(), hi.end(), t) - hi.begin();
        return size_t(std::max<ptrdiff_t>(0, started - ended));
    };

    double best_t = candidates.front();
    size_t best_err = SIZE_MAX;
    for (double t : candidates) {
        size_t fn = split_count(pos_lo, pos_hi, t);
        size_t fp = neg_intervals.size() - split_count(neg_lo, neg_hi, t);
        size_t err = fn + fp;
        if (err < best_err) {
            best_err = err;
            best_t = t;
        }
    }
    return -best_t;
}

}  // namespace

DiffHashResult diffhash_fit(const Mat& data, const std::vector<PairSample>& pairs,
                            Eigen::Index m) {
    const Eigen::Index n = data.cols();
    if (m > n) throw ArgumentError("diffhash_fit: code length exceeds input dimension (rank)");
    check_arg(m >= 1, "diffhash_fit: code length must be >= 1");
    check_arg(!pairs.empty(), "diffhash_fit: empty pair list");
    for (const auto& p : pairs)
        check_arg(Eigen::Index(p.a) < data.rows() && Eigen::Index(p.b) < data.rows(),
                  "diffhash_fit: pair index out of range");

    DiffHashResult res;
    Mat cov_pos = Mat::Zero(n, n);
    Mat cov_neg = Mat::Zero(n, n);
    size_t n_pos = 0, n_neg = 0;
    for (const auto& p : pairs) {
        Vec d = (data.row(p.a) - data.row(p.b)).transpose();
        if (p.label) {
            cov_pos += d * d.transpose();
            ++n_pos;
        } else {
            cov_neg += d * d.transpose();
            ++n_neg;
        }
    }
    if (n_pos) cov_pos /= double(n_pos);
    if (n_neg) cov_neg /= double(n_neg);

    auto regularize = [&](Mat& cov, size_t count, const char* name) {
        if (Eigen::Index(count) < n) {
            std::ostringstream w;
            w << "diffhash_fit: only " << count << " " << name << " pairs for dimension " << n
              << "; covariance is rank deficient, regularizing";
            res.warnings.push_back(w.str());
            double eps = 1e-8 * cov.trace() / double(n);
            cov += eps * Mat::Identity(n, n);
        }
    };
    regularize(cov_pos, n_pos, "positive");
    regularize(cov_neg, n_neg, "negative");

    Eigen::SelfAdjointEigenSolver<Mat> solver(cov_pos - cov_neg);
    if (solver.info() != Eigen::Success)
        throw NumericError("diffhash_fit: eigendecomposition failed");
    res.spectrum = solver.eigenvalues();  // ascending; ties keep solver order

    res.params.proj = Mat(m, n);
    for (Eigen::Index r = 0; r < m; ++r)
        res.params.proj.row(r) = solver.eigenvectors().col(r).transpose();

    // per-dimension bias from the projected pair intervals
    res.params.offset = Vec(m);
    std::vector<double> values(size_t(data.rows()));
    std::vector<std::pair<double, double>> pos_iv, neg_iv;
    pos_iv.reserve(n_pos);
    neg_iv.reserve(n_neg);
    for (Eigen::Index r = 0; r < m; ++r) {
        Vec proj_vals = data * res.params.proj.row(r).transpose();
        for (Eigen::Index i = 0; i < data.rows(); ++i) values[size_t(i)] = proj_vals[i];
        pos_iv.clear();
        neg_iv.clear();
        for (const auto& p : pairs) {
            auto iv = std::make_pair(proj_vals[p.a], proj_vals[p.b]);
            (p.label ? pos_iv : neg_iv).push_back(iv);
        }
        res.params.offset[r] = fit_bias_dimension(values, pos_iv, neg_iv);
    }
    return res;
}

double nnhash_loss(const Vec& y, const Vec& y2, int label, double margin) {
    check_dim(y.size() == y2.size(), "nnhash_loss: code length mismatch");
    check_arg(margin > 0.0, "nnhash_loss: margin must be > 0");
    double d2 = (y - y2).norm();
    if (label) return 0.5 * d2 * d2;
    double gap = margin - d2;
    return gap > 0.0 ? 0.5 * gap * gap : 0.0;
}

namespace {

struct LinearGrad {
    Mat proj;
    Vec offset;
};

// d(nnhash_loss)/dy; the other branch gets the negation.
Vec nnhash_output_grad(const Vec& y, const Vec& y2, int label, double margin) {
    Vec diff = y - y2;
    if (label) return diff;
    double d2 = diff.norm();
    if (d2 >= margin || d2 == 0.0) return Vec::Zero(y.size());
    return -(margin - d2) / d2 * diff;
}

void linear_backprop(double steepness, const Vec& x, const Vec& y, const Vec& gy, double scale,
                     LinearGrad& out) {
    Vec g_pre = Vec(gy.array() * steepness * (1.0 - y.array().square())) * scale;
    out.proj += g_pre * x.transpose();
    out.offset += g_pre;
}

}  // namespace

void nnhash_pair_gradient(const LinearHashParams& p, double steepness, const Vec& xa,
                          const Vec& xb, int label, double margin, Mat& grad_proj,
                          Vec& grad_offset) {
    Vec ya = linear_forward(p, xa, steepness);
    Vec yb = linear_forward(p, xb, steepness);
    Vec gy = nnhash_output_grad(ya, yb, label, margin);
    LinearGrad g{Mat::Zero(p.proj.rows(), p.proj.cols()), Vec::Zero(p.offset.size())};
    linear_backprop(steepness, xa, ya, gy, 1.0, g);
    linear_backprop(steepness, xb, yb, -gy, 1.0, g);
    grad_proj = std::move(g.proj);
    grad_offset = std::move(g.offset);
}

NnHashTrainResult nnhash_train(const Mat& data, const std::vector<PairSample>& pairs,
                               const NnHashConfig& cfg) {
    cfg.sgd.validate();
    check_arg(cfg.m >= 1, "nnhash_train: code length must be >= 1");
    check_arg(cfg.margin > 0.0, "nnhash_train: margin must be > 0");
    check_arg(!pairs.empty(), "nnhash_train: empty pair list");
    for (const auto& p : pairs)
        check_arg(Eigen::Index(p.a) < data.rows() && Eigen::Index(p.b) < data.rows(),
                  "nnhash_train: pair index out of range");

    const Eigen::Index n = data.cols();
    Rng rng(cfg.sgd.seed);
    NnHashTrainResult res;
    res.steepness = cfg.steepness;
    res.params.proj = Mat(cfg.m, n);
    double init_scale = 1.0 / std::sqrt(double(n));
    for (Eigen::Index i = 0; i < cfg.m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) res.params.proj(i, j) = init_scale * rng.normal();
    res.params.offset = Vec::Zero(cfg.m);

    LinearGrad velocity{Mat::Zero(cfg.m, n), Vec::Zero(cfg.m)};
    std::vector<uint32_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = uint32_t(i);
    double lr = cfg.sgd.learning_rate;

    for (int epoch = 0; epoch < cfg.sgd.max_epochs; ++epoch) {
        if (cfg.sgd.shuffle) rng.shuffle(order);
        EpochStats stats;
        stats.epoch = epoch;
        stats.learning_rate = lr;
        double loss_sum = 0, pos_sum = 0, neg_sum = 0, nonzero = 0, entries = 0;
        uint64_t n_pos_total = 0, n_neg_total = 0;
        size_t batches = 0;

        for (size_t start = 0; start < order.size(); start += size_t(cfg.sgd.batch_size)) {
            size_t stop = std::min(order.size(), start + size_t(cfg.sgd.batch_size));
            size_t bp = 0, bn = 0;
            for (size_t i = start; i < stop; ++i) (pairs[order[i]].label ? bp : bn) += 1;

            LinearGrad grad{Mat::Zero(cfg.m, n), Vec::Zero(cfg.m)};
            double batch_loss = 0;
            for (size_t i = start; i < stop; ++i) {
                const PairSample& p = pairs[order[i]];
                Vec xa = data.row(p.a).transpose();
                Vec xb = data.row(p.b).transpose();
                Vec ya = linear_forward(res.params, xa, cfg.steepness);
                Vec yb = linear_forward(res.params, xb, cfg.steepness);
                // averages positives and negatives separately
                double scale = p.label ? 1.0 / double(bp) : 1.0 / double(bn);
                batch_loss += scale * nnhash_loss(ya, yb, p.label, cfg.margin);
                Vec gy = nnhash_output_grad(ya, yb, p.label, cfg.margin);
                linear_backprop(cfg.steepness, xa, ya, gy, scale, grad);
                linear_backprop(cfg.steepness, xb, yb, -gy, scale, grad);

                double d2 = (ya - yb).norm();
                if (p.label) {
                    pos_sum += d2;
                    ++n_pos_total;
                } else {
                    neg_sum += d2;
                    ++n_neg_total;
                }
                for (const Vec* y : {&ya, &yb}) {
                    for (Eigen::Index k = 0; k < y->size(); ++k) nonzero += (*y)[k] != 0.0;
                    entries += double(y->size());
                }
            }
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "nnhash_train: non-finite loss at epoch " << epoch << ", batch "
                    << start / size_t(cfg.sgd.batch_size) << ", gradient norm "
                    << std::sqrt(grad.proj.squaredNorm() + grad.offset.squaredNorm());
                throw NumericError(msg.str());
            }
            velocity.proj = cfg.sgd.momentum * velocity.proj - lr * grad.proj;
            velocity.offset = cfg.sgd.momentum * velocity.offset - lr * grad.offset;
            res.params.proj += velocity.proj;
            res.params.offset += velocity.offset;
            loss_sum += batch_loss;
            ++batches;
        }

        stats.mean_loss = batches ? loss_sum / double(batches) : 0.0;
        stats.mean_sparsity = entries > 0 ? nonzero / entries : 0.0;
        stats.mean_pos_dist = n_pos_total ? pos_sum / double(n_pos_total) : 0.0;
        stats.mean_neg_dist = n_neg_total ? neg_sum / double(n_neg_total) : 0.0;
        res.log.push_back(stats);
        lr *= cfg.sgd.decay;
    }
    return res;
}

}  // namespace ternhash
