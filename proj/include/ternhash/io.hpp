#pragma once

#include "ternhash/baselines.hpp"
#include "ternhash/codes.hpp"
#include "ternhash/common.hpp"
#include "ternhash/encoder.hpp"
#include "ternhash/eval.hpp"
#include "ternhash/trainer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ternhash {

// Binary matrix container: magic "THMX", u32 version, u64 rows, u64 cols,
// then row-major float32. All integers little-endian.
void save_matrix(const Mat& data, const std::string& path);
Mat load_matrix(const std::string& path);
Mat load_matrix_csv(const std::string& path);

// one integer label per line
void save_labels(const std::vector<int>& labels, const std::string& path);
std::vector<int> load_labels(const std::string& path);

// "a b s" triples, one per line
void save_pairs(const std::vector<PairSample>& pairs, const std::string& path);
std::vector<PairSample> load_pairs(const std::string& path);

// Packed code container: magic "THCD", u32 version, u32 code_len,
// u64 count, then ceil(m/4) bytes per code.
void save_codes(const std::vector<TernaryCode>& codes, const std::string& path);
std::vector<TernaryCode> load_codes(const std::string& path);

// Parameter checkpoint: magic "THCK", u32 version, u32 method, u32 n, u32 m,
// u32 iters, f64 steepness, then the parameter blocks as row-major f64
// (encoder: proj, inhib, thresholds; linear methods: proj, offset). A JSON
// sidecar at <path>.json carries seed and config hash.
enum class Method : uint32_t { Ista = 0, NnHash = 1, DiffHash = 2 };

std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct Checkpoint {
    Method method = Method::Ista;
    std::optional<EncoderParams> encoder;     // Ista
    std::optional<LinearHashParams> linear;   // NnHash / DiffHash
    double steepness = 3.0;                   // output slope of linear methods

    Eigen::Index code_len() const;
    Eigen::Index input_dim() const;
    // Encode one sample to its continuous code.
    Vec encode(const Vec& x) const;
    Mat encode_batch(const Mat& data) const;
};

struct CheckpointMeta {
    uint64_t seed = 0;
    std::string config_hash;
};

void save_checkpoint(const Checkpoint& ckpt, const CheckpointMeta& meta, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
CheckpointMeta load_checkpoint_meta(const std::string& path);

// epoch <tab> mean_loss <tab> mean_sparsity <tab> mean_pos_d1 <tab>
// mean_neg_d1 <tab> lr
void save_train_log(const std::vector<EpochStats>& log, const std::string& path);

void save_metric_report_tsv(const MetricReport& report, const std::string& path);
void save_metric_report_json(const MetricReport& report, const std::string& path);
void save_pr_curve(const std::vector<PrPoint>& points, const std::string& path);
void save_experiment_report(const ExperimentReport& report, const std::string& tsv_path,
                            const std::string& json_path);

}  // namespace ternhash
