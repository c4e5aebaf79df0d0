#pragma once

// Shared test machinery: random encoder instances, central finite
// differences over parameter vectors, and kink detection so gradient checks
// only run at differentiable points.

#include "ternhash/baselines.hpp"
#include "ternhash/encoder.hpp"
#include "ternhash/multimodal.hpp"
#include "ternhash/trainer.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace thtest {

using namespace ternhash;

inline Vec random_vec(Rng& rng, Eigen::Index n, double scale = 1.0) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

inline Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

inline EncoderParams random_params(Rng& rng, Eigen::Index n, Eigen::Index m, int iters,
                                   double steepness) {
    EncoderParams p;
    p.proj = random_mat(rng, m, n, 1.0 / std::sqrt(double(n)));
    p.inhib = random_mat(rng, m, m, 0.5 / std::sqrt(double(m)));
    p.thresholds = Vec(m);
    for (Eigen::Index i = 0; i < m; ++i) p.thresholds[i] = 0.3 * rng.uniform();
    p.steepness = steepness;
    p.iters = iters;
    return p;
}

// flat view over (proj, inhib, thresholds) for finite differencing
inline size_t param_count(const EncoderParams& p) {
    return size_t(p.proj.size() + p.inhib.size() + p.thresholds.size());
}

inline double* param_at(EncoderParams& p, size_t k) {
    if (k < size_t(p.proj.size())) return p.proj.data() + k;
    k -= size_t(p.proj.size());
    if (k < size_t(p.inhib.size())) return p.inhib.data() + k;
    k -= size_t(p.inhib.size());
    return p.thresholds.data() + k;
}

inline double grad_at(const EncoderGrad& g, size_t k) {
    if (k < size_t(g.proj.size())) return g.proj.data()[k];
    k -= size_t(g.proj.size());
    if (k < size_t(g.inhib.size())) return g.inhib.data()[k];
    k -= size_t(g.inhib.size());
    return g.thresholds[Eigen::Index(k)];
}

// max relative error between an analytic gradient and central differences
// of `objective` over every parameter coordinate
inline double max_grad_rel_err(const EncoderParams& params, const EncoderGrad& analytic,
                               const std::function<double(const EncoderParams&)>& objective,
                               double h = 1e-5) {
    EncoderParams work = params;
    double worst = 0.0;
    for (size_t k = 0; k < param_count(work); ++k) {
        double* slot = param_at(work, k);
        double orig = *slot;
        double step = h * std::max(1.0, std::abs(orig));
        *slot = orig + step;
        double hi = objective(work);
        *slot = orig - step;
        double lo = objective(work);
        *slot = orig;
        double numeric = (hi - lo) / (2.0 * step);
        double exact = grad_at(analytic, k);
        double denom = std::max(std::abs(numeric), std::abs(exact));
        if (denom < 1e-7) continue;
        worst = std::max(worst, std::abs(numeric - exact) / denom);
    }
    return worst;
}

// true when every shrinkage pre-activation sits clear of its threshold
inline bool trace_kink_free(const EncoderParams& p, const ForwardTrace& t, double delta) {
    for (int step = 0; step <= p.iters; ++step) {
        const Vec& pre = step == 0 ? t.drive : t.pre[size_t(step - 1)];
        for (Eigen::Index i = 0; i < pre.size(); ++i) {
            if (std::abs(std::abs(pre[i]) - p.thresholds[i]) <= delta) return false;
        }
    }
    return true;
}

// kink check for the full pair objective: shrinkage kinks, the l1 distance
// kink (unless both units are locked at zero), and the hinge kink
inline bool pair_kink_free(const EncoderParams& p, const Vec& xa, const Vec& xb, int label,
                           const LossConfig& cfg, double delta = 1e-3) {
    ForwardTrace ta = forward(p, xa);
    ForwardTrace tb = forward(p, xb);
    if (!trace_kink_free(p, ta, delta) || !trace_kink_free(p, tb, delta)) return false;
    const Vec& za = ta.final_state();
    const Vec& zb = tb.final_state();
    for (Eigen::Index i = 0; i < za.size(); ++i) {
        bool both_dead = za[i] == 0.0 && zb[i] == 0.0;
        if (!both_dead && std::abs(ta.output[i] - tb.output[i]) <= delta) return false;
    }
    if (!label) {
        double d1 = (ta.output - tb.output).lpNorm<1>();
        if (std::abs(cfg.margin - d1) <= delta) return false;
    }
    return true;
}

inline bool nnhash_kink_free(const LinearHashParams& p, double steepness, const Vec& xa,
                             const Vec& xb, int label, double margin, double delta = 1e-3) {
    if (label) return true;  // positive branch is smooth
    Vec ya = linear_forward(p, xa, steepness);
    Vec yb = linear_forward(p, xb, steepness);
    double d2 = (ya - yb).norm();
    return d2 > delta && std::abs(margin - d2) > delta;
}

}  // namespace thtest
