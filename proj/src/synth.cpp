#include "ternhash/synth.hpp"

namespace ternhash {

SynthData make_clusters(const SynthConfig& cfg) {
    check_arg(cfg.clusters >= 1, "make_clusters: need at least one cluster");
    check_arg(cfg.dim >= 1, "make_clusters: dimension must be >= 1");
    check_arg(cfg.count >= cfg.clusters, "make_clusters: need at least one point per cluster");
    check_arg(cfg.spread >= 0.0, "make_clusters: spread must be nonnegative");

    Rng rng(cfg.seed);
    Mat centers(Eigen::Index(cfg.clusters), Eigen::Index(cfg.dim));
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
        for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(i, j) = rng.normal();

    SynthData data;
    data.points = Mat(Eigen::Index(cfg.count), Eigen::Index(cfg.dim));
    data.labels.resize(cfg.count);
    for (size_t i = 0; i < cfg.count; ++i) {
        int label = int(i % cfg.clusters);
        data.labels[i] = label;
        for (Eigen::Index j = 0; j < data.points.cols(); ++j)
            data.points(Eigen::Index(i), j) = centers(label, j) + cfg.spread * rng.normal();
    }
    return data;
}

}  // namespace ternhash
