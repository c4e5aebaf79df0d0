#pragma once

#include "ternhash/common.hpp"
#include "ternhash/trainer.hpp"

#include <string>
#include <vector>

namespace ternhash {

// Linear hashing family: code = sign(proj * x + offset), trained or fitted
// per method. The smooth variant replaces sign with tanh(steepness * .).
struct LinearHashParams {
    Mat proj;    // m x n
    Vec offset;  // m

    Eigen::Index code_len() const { return proj.rows(); }
    Eigen::Index input_dim() const { return proj.cols(); }
};

Vec linear_forward(const LinearHashParams& p, const Vec& x, double steepness);
Mat linear_encode_batch(const LinearHashParams& p, const Mat& data, double steepness);

struct DiffHashResult {
    LinearHashParams params;
    Vec spectrum;                        // eigenvalues of the difference matrix, ascending
    std::vector<std::string> warnings;   // rank deficiencies etc.
};

// Spectral fit: projection rows are the m eigenvectors with smallest
// eigenvalues of cov(positive differences) - cov(negative differences);
// each offset entry is chosen independently to minimize single-bit pair
// classification errors on the training pairs.
DiffHashResult diffhash_fit(const Mat& data, const std::vector<PairSample>& pairs,
                            Eigen::Index m);

// Siamese l2 hinge: positives 0.5*||y-y'||^2, negatives
// 0.5*max(0, margin - ||y-y'||)^2. Batch reduction averages positives and
// negatives separately.
double nnhash_loss(const Vec& y, const Vec& y2, int label, double margin);

// Gradient of nnhash_loss(linear(xa), linear(xb)) w.r.t. proj and offset,
// accumulated over both branches.
void nnhash_pair_gradient(const LinearHashParams& p, double steepness, const Vec& xa,
                          const Vec& xb, int label, double margin, Mat& grad_proj,
                          Vec& grad_offset);

struct NnHashConfig {
    Eigen::Index m = 16;
    double margin = 4.0;
    double steepness = 3.0;
    SgdConfig sgd;
};

struct NnHashTrainResult {
    LinearHashParams params;
    double steepness = 3.0;
    std::vector<EpochStats> log;  // pos/neg distances are l2 here
};

NnHashTrainResult nnhash_train(const Mat& data, const std::vector<PairSample>& pairs,
                               const NnHashConfig& cfg);

}  // namespace ternhash
