#include "ternhash/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace ternhash {

void LossConfig::validate() const {
    check_arg(sparsity_weight >= 0.0, "LossConfig: sparsity_weight must be >= 0");
    check_arg(negative_weight >= 0.0, "LossConfig: negative_weight must be >= 0");
    check_arg(margin > 0.0, "LossConfig: margin must be > 0");
}

void SgdConfig::validate() const {
    check_arg(learning_rate > 0.0, "SgdConfig: learning_rate must be > 0");
    check_arg(decay > 0.0 && decay <= 1.0, "SgdConfig: decay must be in (0,1]");
    check_arg(momentum >= 0.0 && momentum < 1.0, "SgdConfig: momentum must be in [0,1)");
    check_arg(max_epochs >= 1, "SgdConfig: max_epochs must be >= 1");
    check_arg(batch_size >= 1, "SgdConfig: batch_size must be >= 1");
    check_arg(workers >= 1, "SgdConfig: workers must be >= 1");
}

EncoderGrad EncoderGrad::zeros_like(const EncoderParams& p) {
    EncoderGrad g;
    g.proj = Mat::Zero(p.proj.rows(), p.proj.cols());
    g.inhib = Mat::Zero(p.inhib.rows(), p.inhib.cols());
    g.thresholds = Vec::Zero(p.thresholds.size());
    return g;
}

void EncoderGrad::add(const EncoderGrad& o, double s) {
    proj += s * o.proj;
    inhib += s * o.inhib;
    thresholds += s * o.thresholds;
}

void EncoderGrad::scale(double s) {
    proj *= s;
    inhib *= s;
    thresholds *= s;
}

double EncoderGrad::squared_norm() const {
    return proj.squaredNorm() + inhib.squaredNorm() + thresholds.squaredNorm();
}

double pair_loss(const Vec& y, const Vec& y2, int label, const LossConfig& cfg) {
    check_dim(y.size() == y2.size(), "pair_loss: code length mismatch");
    cfg.validate();
    double d1 = (y - y2).lpNorm<1>();
    double loss = cfg.sparsity_weight * (y.lpNorm<1>() + y2.lpNorm<1>());
    if (label) {
        loss += d1;
    } else {
        double gap = cfg.margin - d1;
        if (gap > 0.0) loss += 0.5 * cfg.negative_weight * gap * gap;
    }
    return loss;
}

void pair_loss_output_grads(const Vec& y, const Vec& y2, int label, const LossConfig& cfg,
                            Vec& gy, Vec& gy2) {
    check_dim(y.size() == y2.size(), "pair_loss_output_grads: code length mismatch");
    double d1 = (y - y2).lpNorm<1>();
    // coefficient on d||y - y2||_1
    double coeff = 0.0;
    if (label) {
        coeff = 1.0;
    } else {
        double gap = cfg.margin - d1;
        if (gap > 0.0) coeff = -cfg.negative_weight * gap;
    }
    gy = Vec::Zero(y.size());
    gy2 = Vec::Zero(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double diff = y[i] - y2[i];
        double sd = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        gy[i] = coeff * sd + cfg.sparsity_weight * (y[i] > 0.0 ? 1.0 : (y[i] < 0.0 ? -1.0 : 0.0));
        gy2[i] = -coeff * sd + cfg.sparsity_weight * (y2[i] > 0.0 ? 1.0 : (y2[i] < 0.0 ? -1.0 : 0.0));
    }
}

void backprop_branch(const EncoderParams& params, const ForwardTrace& trace, const Vec& gout,
                     EncoderGrad& out) {
    const int T = params.iters;
    if (Eigen::Index(trace.state.size()) != T + 1)
        throw InternalError("backprop_branch: trace does not match params");

    // through the tanh
    Vec g_state = Vec(gout.array() * params.steepness *
                      (1.0 - trace.output.array().square()));
    Vec g_drive = Vec::Zero(trace.drive.size());

    for (int t = T; t >= 0; --t) {
        const Vec& pre = t == 0 ? trace.drive : trace.pre[size_t(t - 1)];
        // shrinkage passes gradient only outside the dead zone; kinks get 0
        Vec g_pre(pre.size());
        for (Eigen::Index i = 0; i < pre.size(); ++i) {
            bool active = std::abs(pre[i]) > params.thresholds[i];
            g_pre[i] = active ? g_state[i] : 0.0;
            if (active) {
                out.thresholds[i] -= (pre[i] > 0.0 ? 1.0 : -1.0) * g_state[i];
            }
        }
        g_drive += g_pre;
        if (t >= 1) {
            out.inhib += g_pre * trace.state[size_t(t - 1)].transpose();
            g_state = params.inhib.transpose() * g_pre;
        }
    }
    out.proj += g_drive * trace.input.transpose();
}

EncoderGrad pair_gradient(const ForwardTrace& trace, const ForwardTrace& trace2, int label,
                          const LossConfig& cfg, const EncoderParams& params) {
    if (trace.drive.size() != params.code_len() || trace2.drive.size() != params.code_len())
        throw InternalError("pair_gradient: traces inconsistent with params");
    Vec gy, gy2;
    pair_loss_output_grads(trace.output, trace2.output, label, cfg, gy, gy2);
    EncoderGrad g = EncoderGrad::zeros_like(params);
    backprop_branch(params, trace, gy, g);
    backprop_branch(params, trace2, gy2, g);
    return g;
}

namespace {

struct BatchAccum {
    EncoderGrad grad;
    double loss = 0;
    double nonzero = 0;       // nonzero final-state entries
    double entries = 0;
    double pos_dist = 0;
    double neg_dist = 0;
    uint64_t n_pos = 0;
    uint64_t n_neg = 0;
};

void accumulate_span(const Mat& data, const std::vector<PairSample>& pairs, size_t begin,
                     size_t end, const LossConfig& loss_cfg, const EncoderParams& params,
                     BatchAccum& acc) {
    for (size_t k = begin; k < end; ++k) {
        const PairSample& p = pairs[k];
        ForwardTrace ta = forward(params, data.row(p.a).transpose());
        ForwardTrace tb = forward(params, data.row(p.b).transpose());
        acc.loss += pair_loss(ta.output, tb.output, p.label, loss_cfg);
        acc.grad.add(pair_gradient(ta, tb, p.label, loss_cfg, params));

        double d1 = (ta.output - tb.output).lpNorm<1>();
        if (p.label) {
            acc.pos_dist += d1;
            ++acc.n_pos;
        } else {
            acc.neg_dist += d1;
            ++acc.n_neg;
        }
        for (const Vec* z : {&ta.final_state(), &tb.final_state()}) {
            for (Eigen::Index i = 0; i < z->size(); ++i) acc.nonzero += (*z)[i] != 0.0;
            acc.entries += double(z->size());
        }
    }
}

}  // namespace

TrainResult train(const Mat& data, const std::vector<PairSample>& pairs,
                  const LossConfig& loss_cfg, const SgdConfig& sgd_cfg,
                  const EncoderParams& init) {
    loss_cfg.validate();
    sgd_cfg.validate();
    init.validate();
    if (!data.allFinite()) throw NumericError("train: non-finite values in feature data");
    check_arg(!pairs.empty(), "train: empty pair list");
    for (const PairSample& p : pairs) {
        check_arg(Eigen::Index(p.a) < data.rows() && Eigen::Index(p.b) < data.rows(),
                  "train: pair index out of range");
        check_arg(p.a != p.b, "train: pair with identical indices");
        check_arg(p.label <= 1, "train: label must be 0 or 1");
    }

    TrainResult res;
    res.params = init;
    EncoderGrad velocity = EncoderGrad::zeros_like(init);
    std::vector<uint32_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = uint32_t(i);

    Rng rng(sgd_cfg.seed);
    double lr = sgd_cfg.learning_rate;

    for (int epoch = 0; epoch < sgd_cfg.max_epochs; ++epoch) {
        if (sgd_cfg.shuffle) rng.shuffle(order);

        EpochStats stats;
        stats.epoch = epoch;
        stats.learning_rate = lr;
        double loss_sum = 0, nonzero = 0, entries = 0, pos_sum = 0, neg_sum = 0;
        uint64_t n_pos = 0, n_neg = 0;

        for (size_t start = 0; start < order.size(); start += size_t(sgd_cfg.batch_size)) {
            size_t stop = std::min(order.size(), start + size_t(sgd_cfg.batch_size));
            std::vector<PairSample> batch(stop - start);
            for (size_t i = start; i < stop; ++i) batch[i - start] = pairs[order[i]];

            int workers = std::min<int>(sgd_cfg.workers, int(batch.size()));
            std::vector<BatchAccum> accums(static_cast<size_t>(workers));
            for (auto& a : accums) a.grad = EncoderGrad::zeros_like(res.params);
            if (workers <= 1) {
                accumulate_span(data, batch, 0, batch.size(), loss_cfg, res.params, accums[0]);
            } else {
                std::vector<std::thread> threads;
                size_t chunk = (batch.size() + size_t(workers) - 1) / size_t(workers);
                for (int w = 0; w < workers; ++w) {
                    size_t b = size_t(w) * chunk;
                    size_t e = std::min(batch.size(), b + chunk);
                    threads.emplace_back([&, b, e, w] {
                        accumulate_span(data, batch, b, e, loss_cfg, res.params,
                                        accums[size_t(w)]);
                    });
                }
                for (auto& t : threads) t.join();
            }
            // fixed-order reduction keeps results deterministic
            BatchAccum total = std::move(accums[0]);
            for (size_t w = 1; w < accums.size(); ++w) {
                total.grad.add(accums[w].grad);
                total.loss += accums[w].loss;
                total.nonzero += accums[w].nonzero;
                total.entries += accums[w].entries;
                total.pos_dist += accums[w].pos_dist;
                total.neg_dist += accums[w].neg_dist;
                total.n_pos += accums[w].n_pos;
                total.n_neg += accums[w].n_neg;
            }

            double inv = 1.0 / double(batch.size());
            if (!std::isfinite(total.loss)) {
                std::ostringstream msg;
                msg << "train: non-finite loss at epoch " << epoch << ", batch "
                    << start / size_t(sgd_cfg.batch_size) << ", gradient norm "
                    << std::sqrt(total.grad.squared_norm());
                throw NumericError(msg.str());
            }
            total.grad.scale(inv);

            velocity.scale(sgd_cfg.momentum);
            velocity.add(total.grad, -lr);
            res.params.proj += velocity.proj;
            res.params.inhib += velocity.inhib;
            res.params.thresholds += velocity.thresholds;
            res.params.thresholds = res.params.thresholds.cwiseMax(0.0);

            loss_sum += total.loss;
            nonzero += total.nonzero;
            entries += total.entries;
            pos_sum += total.pos_dist;
            neg_sum += total.neg_dist;
            n_pos += total.n_pos;
            n_neg += total.n_neg;
        }

        stats.mean_loss = loss_sum / double(pairs.size());
        stats.mean_sparsity = entries > 0 ? nonzero / entries : 0.0;
        stats.mean_pos_dist = n_pos ? pos_sum / double(n_pos) : 0.0;
        stats.mean_neg_dist = n_neg ? neg_sum / double(n_neg) : 0.0;
        res.log.push_back(stats);

        lr *= sgd_cfg.decay;
    }
    return res;
}

std::vector<PairSample> make_pairs_from_labels(const std::vector<int>& labels, size_t n_positive,
                                               size_t n_negative, uint64_t seed) {
    check_arg(labels.size() >= 2, "make_pairs_from_labels: need at least two samples");
    Rng rng(seed);
    std::vector<PairSample> out;
    out.reserve(n_positive + n_negative);

    auto draw = [&](bool want_same) {
        for (int attempt = 0; attempt < 100000; ++attempt) {
            uint32_t a = uint32_t(rng.index(labels.size()));
            uint32_t b = uint32_t(rng.index(labels.size()));
            if (a == b) continue;
            if ((labels[a] == labels[b]) == want_same) {
                out.push_back({a, b, uint8_t(want_same ? 1 : 0)});
                return;
            }
        }
        throw DataError("make_pairs_from_labels: could not draw requested pair kind");
    };
    for (size_t i = 0; i < n_positive; ++i) draw(true);
    for (size_t i = 0; i < n_negative; ++i) draw(false);
    return out;
}

}  // namespace ternhash
