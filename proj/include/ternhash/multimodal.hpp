#pragma once

#include "ternhash/common.hpp"
#include "ternhash/encoder.hpp"
#include "ternhash/trainer.hpp"

#include <vector>

namespace ternhash {

enum class PairKind : uint8_t { XX = 0, YY = 1, XY = 2 };

// A pair drawn within one modality (XX, YY) or across them (XY). Indices
// address the dataset(s) named by `kind`.
struct MultimodalPair {
    PairKind kind = PairKind::XY;
    uint32_t a = 0;
    uint32_t b = 0;
    uint8_t label = 0;
};

struct MultimodalConfig {
    double intra_x_weight = 0.0;  // 0 in the cross-modal regime
    double intra_y_weight = 0.0;
    LossConfig loss_x;
    LossConfig loss_y;
    LossConfig loss_xy;
    SgdConfig sgd;
    void validate() const;
};

struct MultimodalGrad {
    EncoderGrad x;
    EncoderGrad y;
};

struct MultimodalTrainResult {
    EncoderParams params_x;
    EncoderParams params_y;
    std::vector<EpochStats> log;  // pos/neg distances are over XY pairs
};

// Mean over the batch of
//   intra_x_weight * pair_loss(enc_x(a), enc_x(b))   for XX pairs
//   intra_y_weight * pair_loss(enc_y(a), enc_y(b))   for YY pairs
//   pair_loss(enc_x(a), enc_y(b))                    for XY pairs
double mm_loss(const std::vector<MultimodalPair>& batch, const Mat& data_x, const Mat& data_y,
               const EncoderParams& enc_x, const EncoderParams& enc_y,
               const MultimodalConfig& cfg);

// Gradients of the batch mean w.r.t. both encoders' parameters.
MultimodalGrad mm_gradient(const std::vector<MultimodalPair>& batch, const Mat& data_x,
                           const Mat& data_y, const EncoderParams& enc_x,
                           const EncoderParams& enc_y, const MultimodalConfig& cfg);

// Joint SGD over both encoders; XY pairs contribute gradients to both.
MultimodalTrainResult mm_train(const Mat& data_x, const Mat& data_y,
                               const std::vector<MultimodalPair>& pairs,
                               const MultimodalConfig& cfg, const EncoderParams& init_x,
                               const EncoderParams& init_y);

}  // namespace ternhash
