#pragma once

#include "ternhash/common.hpp"

#include <cstdint>
#include <vector>

namespace ternhash {

// Gaussian cluster generator; the desk-scale stand-in for real descriptor
// datasets. Cluster centers are standard normal, points add `spread`-scaled
// isotropic noise.
struct SynthConfig {
    size_t clusters = 10;
    size_t dim = 32;
    size_t count = 2000;
    double spread = 0.5;
    uint64_t seed = 1;
};

struct SynthData {
    Mat points;               // count x dim
    std::vector<int> labels;  // cluster id per row
};

SynthData make_clusters(const SynthConfig& cfg);

}  // namespace ternhash
