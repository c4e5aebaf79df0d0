#pragma once

#include "ternhash/common.hpp"

#include <vector>

namespace ternhash {

// Parameters of the recurrent shrinkage encoder: a projection into code
// space, a mutual-inhibition matrix applied over `iters` refinement steps,
// per-unit soft thresholds, and the slope of the output tanh.
struct EncoderParams {
    Mat proj;        // m x n
    Mat inhib;       // m x m
    Vec thresholds;  // m, nonnegative
    double steepness = 3.0;
    int iters = 1;

    Eigen::Index code_len() const { return proj.rows(); }
    Eigen::Index input_dim() const { return proj.cols(); }
    void validate() const;
};

// All intermediates of one forward evaluation, kept for backpropagation.
struct ForwardTrace {
    Vec input;                // x, length n
    Vec drive;                // b = proj * x
    std::vector<Vec> pre;     // u^(1) .. u^(T): drive + inhib * state^(t-1)
    std::vector<Vec> state;   // z^(0) .. z^(T), post-shrinkage
    Vec output;               // y = tanh(steepness * z^(T))

    const Vec& final_state() const { return state.back(); }
};

// Soft threshold max(0, |x| - tau) * sign(x), elementwise.
Vec shrink(const Vec& x, const Vec& tau);

// b = proj*x; z0 = shrink(b, tau); z_t = shrink(b + inhib*z_{t-1}, tau);
// output = tanh(steepness * z_T).
ForwardTrace forward(const EncoderParams& params, const Vec& x);

// Convenience: encode a batch of rows, outputs as rows of the result.
Mat encode_batch(const EncoderParams& params, const Mat& data);

// proj rows are a seeded random sample of m distinct training rows,
// normalized to unit length (zero rows are skipped); inhib = I - G/L with
// G = proj*proj^T and L its largest eigenvalue from power iteration;
// thresholds start at zero.
EncoderParams init_params(const Mat& training, Eigen::Index m, int iters, double steepness,
                          uint64_t seed);

// Largest eigenvalue of a symmetric PSD matrix by power iteration,
// to relative tolerance `tol` on the eigenvalue.
double power_iteration_max_eigenvalue(const Mat& sym, double tol = 1e-6, int max_iter = 10000);

}  // namespace ternhash
