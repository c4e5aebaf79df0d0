#pragma once

#include "ternhash/common.hpp"
#include "ternhash/encoder.hpp"

#include <cstdint>
#include <vector>

namespace ternhash {

// One supervised pair: indices into a dataset plus a similar/dissimilar label.
struct PairSample {
    uint32_t a = 0;
    uint32_t b = 0;
    uint8_t label = 0;  // 1 similar, 0 dissimilar
};

struct LossConfig {
    double sparsity_weight = 0.01;  // weight of the l1 code penalty
    double negative_weight = 0.1;   // weight of the dissimilar-pair hinge
    double margin = 8.0;            // hinge margin on the l1 code distance
    void validate() const;
};

struct SgdConfig {
    double learning_rate = 0.05;
    double decay = 0.98;      // learning rate multiplier per epoch
    double momentum = 0.9;    // in [0, 1)
    int max_epochs = 250;
    int batch_size = 32;
    uint64_t seed = 1;
    bool shuffle = true;
    int workers = 1;          // >1 evaluates batch gradients in parallel
    void validate() const;
};

// Gradient of a loss w.r.t. one encoder's parameters.
struct EncoderGrad {
    Mat proj;
    Mat inhib;
    Vec thresholds;

    static EncoderGrad zeros_like(const EncoderParams& p);
    void add(const EncoderGrad& o, double scale = 1.0);
    void scale(double s);
    double squared_norm() const;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0;
    double mean_sparsity = 0;   // fraction of nonzero final-state entries
    double mean_pos_dist = 0;   // mean l1 distance over similar pairs
    double mean_neg_dist = 0;   // over dissimilar pairs
    double learning_rate = 0;
};

struct TrainResult {
    EncoderParams params;
    std::vector<EpochStats> log;
};

// label * ||y - y'||_1
//   + (negative_weight/2) * (1-label) * max(0, margin - ||y - y'||_1)^2
//   + sparsity_weight * (||y||_1 + ||y'||_1)
double pair_loss(const Vec& y, const Vec& y2, int label, const LossConfig& cfg);

// d(pair_loss)/dy and /dy2 (the two branch outputs).
void pair_loss_output_grads(const Vec& y, const Vec& y2, int label, const LossConfig& cfg,
                            Vec& gy, Vec& gy2);

// Backpropagate an output gradient through one recorded forward pass,
// accumulating into `out`. Subgradient conventions: zero inside the
// shrinkage dead zone and at every kink.
void backprop_branch(const EncoderParams& params, const ForwardTrace& trace, const Vec& gout,
                     EncoderGrad& out);

// Exact subgradient of pair_loss(forward(a), forward(b)) w.r.t. the shared
// parameters; the two branch contributions sum.
EncoderGrad pair_gradient(const ForwardTrace& trace, const ForwardTrace& trace2, int label,
                          const LossConfig& cfg, const EncoderParams& params);

// Momentum SGD over shuffled pair batches with a geometrically annealed
// learning rate. Thresholds are clamped to be nonnegative after each step.
// Deterministic given (init, configs, data).
TrainResult train(const Mat& data, const std::vector<PairSample>& pairs, const LossConfig& loss_cfg,
                  const SgdConfig& sgd_cfg, const EncoderParams& init);

// Random similar/dissimilar pairs derived from class labels.
std::vector<PairSample> make_pairs_from_labels(const std::vector<int>& labels, size_t n_positive,
                                               size_t n_negative, uint64_t seed);

}  // namespace ternhash
