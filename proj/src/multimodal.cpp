#include "ternhash/multimodal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ternhash {

void MultimodalConfig::validate() const {
    check_arg(intra_x_weight >= 0.0 && intra_y_weight >= 0.0,
              "MultimodalConfig: intra weights must be nonnegative");
    loss_x.validate();
    loss_y.validate();
    loss_xy.validate();
    sgd.validate();
}

namespace {

void check_mm_inputs(const std::vector<MultimodalPair>& pairs, const Mat& data_x,
                     const Mat& data_y, const EncoderParams& enc_x, const EncoderParams& enc_y) {
    if (enc_x.code_len() != enc_y.code_len())
        throw ArgumentError("multimodal: encoders must share code length");
    check_dim(enc_x.input_dim() == data_x.cols(), "multimodal: X dimension mismatch");
    check_dim(enc_y.input_dim() == data_y.cols(), "multimodal: Y dimension mismatch");
    for (const auto& p : pairs) {
        Eigen::Index na = p.kind == PairKind::YY ? data_y.rows() : data_x.rows();
        Eigen::Index nb = p.kind == PairKind::XX ? data_x.rows() : data_y.rows();
        check_arg(Eigen::Index(p.a) < na && Eigen::Index(p.b) < nb,
                  "multimodal: pair index out of range");
        check_arg(p.label <= 1, "multimodal: label must be 0 or 1");
    }
}

struct MmAccum {
    MultimodalGrad grad;
    double loss = 0;
    double nonzero = 0, entries = 0;
    double pos_dist = 0, neg_dist = 0;  // XY pairs only
    uint64_t n_pos = 0, n_neg = 0;
};

void mm_accumulate(const MultimodalPair& p, const Mat& data_x, const Mat& data_y,
                   const EncoderParams& enc_x, const EncoderParams& enc_y,
                   const MultimodalConfig& cfg, MmAccum& acc) {
    auto track = [&](const Vec& z) {
        for (Eigen::Index i = 0; i < z.size(); ++i) acc.nonzero += z[i] != 0.0;
        acc.entries += double(z.size());
    };
    switch (p.kind) {
        case PairKind::XX: {
            if (cfg.intra_x_weight == 0.0) return;  // no loss, no gradient
            ForwardTrace ta = forward(enc_x, data_x.row(p.a).transpose());
            ForwardTrace tb = forward(enc_x, data_x.row(p.b).transpose());
            acc.loss += cfg.intra_x_weight * pair_loss(ta.output, tb.output, p.label, cfg.loss_x);
            acc.grad.x.add(pair_gradient(ta, tb, p.label, cfg.loss_x, enc_x), cfg.intra_x_weight);
            track(ta.final_state());
            track(tb.final_state());
            break;
        }
        case PairKind::YY: {
            if (cfg.intra_y_weight == 0.0) return;
            ForwardTrace ta = forward(enc_y, data_y.row(p.a).transpose());
            ForwardTrace tb = forward(enc_y, data_y.row(p.b).transpose());
            acc.loss += cfg.intra_y_weight * pair_loss(ta.output, tb.output, p.label, cfg.loss_y);
            acc.grad.y.add(pair_gradient(ta, tb, p.label, cfg.loss_y, enc_y), cfg.intra_y_weight);
            track(ta.final_state());
            track(tb.final_state());
            break;
        }
        case PairKind::XY: {
            ForwardTrace ta = forward(enc_x, data_x.row(p.a).transpose());
            ForwardTrace tb = forward(enc_y, data_y.row(p.b).transpose());
            acc.loss += pair_loss(ta.output, tb.output, p.label, cfg.loss_xy);
            Vec gy, gy2;
            pair_loss_output_grads(ta.output, tb.output, p.label, cfg.loss_xy, gy, gy2);
            backprop_branch(enc_x, ta, gy, acc.grad.x);
            backprop_branch(enc_y, tb, gy2, acc.grad.y);
            track(ta.final_state());
            track(tb.final_state());

            double d1 = (ta.output - tb.output).lpNorm<1>();
            if (p.label) {
                acc.pos_dist += d1;
                ++acc.n_pos;
            } else {
                acc.neg_dist += d1;
                ++acc.n_neg;
            }
            break;
        }
    }
}

}  // namespace

double mm_loss(const std::vector<MultimodalPair>& batch, const Mat& data_x, const Mat& data_y,
               const EncoderParams& enc_x, const EncoderParams& enc_y,
               const MultimodalConfig& cfg) {
    check_arg(!batch.empty(), "mm_loss: empty batch");
    check_mm_inputs(batch, data_x, data_y, enc_x, enc_y);
    MmAccum acc;
    acc.grad.x = EncoderGrad::zeros_like(enc_x);
    acc.grad.y = EncoderGrad::zeros_like(enc_y);
    for (const auto& p : batch) mm_accumulate(p, data_x, data_y, enc_x, enc_y, cfg, acc);
    return acc.loss / double(batch.size());
}

MultimodalGrad mm_gradient(const std::vector<MultimodalPair>& batch, const Mat& data_x,
                           const Mat& data_y, const EncoderParams& enc_x,
                           const EncoderParams& enc_y, const MultimodalConfig& cfg) {
    check_arg(!batch.empty(), "mm_gradient: empty batch");
    check_mm_inputs(batch, data_x, data_y, enc_x, enc_y);
    MmAccum acc;
    acc.grad.x = EncoderGrad::zeros_like(enc_x);
    acc.grad.y = EncoderGrad::zeros_like(enc_y);
    for (const auto& p : batch) mm_accumulate(p, data_x, data_y, enc_x, enc_y, cfg, acc);
    acc.grad.x.scale(1.0 / double(batch.size()));
    acc.grad.y.scale(1.0 / double(batch.size()));
    return std::move(acc.grad);
}

MultimodalTrainResult mm_train(const Mat& data_x, const Mat& data_y,
                               const std::vector<MultimodalPair>& pairs,
                               const MultimodalConfig& cfg, const EncoderParams& init_x,
                               const EncoderParams& init_y) {
    cfg.validate();
    init_x.validate();
    init_y.validate();
    check_arg(!pairs.empty(), "mm_train: empty pair list");
    check_mm_inputs(pairs, data_x, data_y, init_x, init_y);

    MultimodalTrainResult res;
    res.params_x = init_x;
    res.params_y = init_y;
    EncoderGrad vel_x = EncoderGrad::zeros_like(init_x);
    EncoderGrad vel_y = EncoderGrad::zeros_like(init_y);

    std::vector<uint32_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = uint32_t(i);
    Rng rng(cfg.sgd.seed);
    double lr = cfg.sgd.learning_rate;

    for (int epoch = 0; epoch < cfg.sgd.max_epochs; ++epoch) {
        if (cfg.sgd.shuffle) rng.shuffle(order);
        EpochStats stats;
        stats.epoch = epoch;
        stats.learning_rate = lr;
        double loss_sum = 0, nonzero = 0, entries = 0, pos_sum = 0, neg_sum = 0;
        uint64_t n_pos = 0, n_neg = 0;

        for (size_t start = 0; start < order.size(); start += size_t(cfg.sgd.batch_size)) {
            size_t stop = std::min(order.size(), start + size_t(cfg.sgd.batch_size));
            MmAccum acc;
            acc.grad.x = EncoderGrad::zeros_like(res.params_x);
            acc.grad.y = EncoderGrad::zeros_like(res.params_y);
            for (size_t i = start; i < stop; ++i)
                mm_accumulate(pairs[order[i]], data_x, data_y, res.params_x, res.params_y, cfg,
                              acc);

            if (!std::isfinite(acc.loss)) {
                std::ostringstream msg;
                msg << "mm_train: non-finite loss at epoch " << epoch << ", batch "
                    << start / size_t(cfg.sgd.batch_size) << ", gradient norm "
                    << std::sqrt(acc.grad.x.squared_norm() + acc.grad.y.squared_norm());
                throw NumericError(msg.str());
            }
            double inv = 1.0 / double(stop - start);
            acc.grad.x.scale(inv);
            acc.grad.y.scale(inv);

            vel_x.scale(cfg.sgd.momentum);
            vel_x.add(acc.grad.x, -lr);
            res.params_x.proj += vel_x.proj;
            res.params_x.inhib += vel_x.inhib;
            res.params_x.thresholds = (res.params_x.thresholds + vel_x.thresholds).cwiseMax(0.0);

            vel_y.scale(cfg.sgd.momentum);
            vel_y.add(acc.grad.y, -lr);
            res.params_y.proj += vel_y.proj;
            res.params_y.inhib += vel_y.inhib;
            res.params_y.thresholds = (res.params_y.thresholds + vel_y.thresholds).cwiseMax(0.0);

            loss_sum += acc.loss;
            nonzero += acc.nonzero;
            entries += acc.entries;
            pos_sum += acc.pos_dist;
            neg_sum += acc.neg_dist;
            n_pos += acc.n_pos;
            n_neg += acc.n_neg;
        }

        stats.mean_loss = loss_sum / double(pairs.size());
        stats.mean_sparsity = entries > 0 ? nonzero / entries : 0.0;
        stats.mean_pos_dist = n_pos ? pos_sum / double(n_pos) : 0.0;
        stats.mean_neg_dist = n_neg ? neg_sum / double(n_neg) : 0.0;
        res.log.push_back(stats);
        lr *= cfg.sgd.decay;
    }
    return res;
}

}  // namespace ternhash
