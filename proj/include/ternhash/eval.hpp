#pragma once

#include "ternhash/codes.hpp"
#include "ternhash/common.hpp"
#include "ternhash/retrieval.hpp"
#include "ternhash/synth.hpp"
#include "ternhash/trainer.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ternhash {

// Relevance oracle between a query set and a database, realized either from
// class labels (shared label => relevant) or an explicit pair list.
class GroundTruth {
public:
    static GroundTruth from_labels(std::vector<int> query_labels, std::vector<int> db_labels);
    static GroundTruth from_pairs(size_t n_queries, size_t n_db,
                                  const std::vector<std::pair<uint32_t, uint32_t>>& relevant);

    bool relevant(uint32_t query, uint32_t db_item) const;
    uint64_t relevant_count(uint32_t query) const;
    size_t n_queries() const { return n_queries_; }
    size_t n_db() const { return n_db_; }

private:
    size_t n_queries_ = 0;
    size_t n_db_ = 0;
    bool labels_mode_ = true;
    std::vector<int> query_labels_;
    std::vector<int> db_labels_;
    std::map<int, uint64_t> db_label_counts_;
    std::vector<std::vector<uint32_t>> relevant_by_query_;  // sorted
};

enum class Averaging : uint8_t { Micro = 0, Macro = 1 };

struct RadiusMetrics {
    unsigned radius = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    uint64_t retrieved = 0;
    uint64_t relevant = 0;            // over queries with at least one relevant item
    uint64_t relevant_retrieved = 0;
    uint64_t queries_skipped = 0;     // queries with no relevant items
};

struct RankingMetrics {
    double mean_ap = 0;                // normalized by min(R, #relevant)
    double mean_ap_unnormalized = 0;   // raw sum, can exceed 1
    double mean_precision = 0;         // MP@K
    unsigned rank_cap = 0;             // R
    unsigned top_k = 0;                // K
    uint64_t queries_evaluated = 0;
    uint64_t queries_skipped = 0;
};

struct MetricReport {
    std::vector<RadiusMetrics> per_radius;
    RankingMetrics ranking;
};

// Precision/recall/F1 of per-query retrieved sets. Micro averaging uses
// global counts; macro averages per-query rates. Queries with no relevant
// items are excluded from the recall denominator and counted in
// queries_skipped.
RadiusMetrics pr_at_radius(const std::vector<std::vector<uint32_t>>& results,
                           const GroundTruth& gt, unsigned radius,
                           Averaging averaging = Averaging::Micro);

// Mean over queries of sum_{n=1..R} P(n)*rel(n) / min(R, #relevant).
// Rankings shorter than R are padded with irrelevant entries. Queries with
// no relevant items are skipped (so mAP at R=1 equals MP@1 exactly).
RankingMetrics mean_average_precision(const std::vector<std::vector<uint32_t>>& rankings,
                                      const GroundTruth& gt, unsigned R);

// Mean over queries of (#relevant in top K)/K, same query-skipping rule.
RankingMetrics mean_precision_at_k(const std::vector<std::vector<uint32_t>>& rankings,
                                   const GroundTruth& gt, unsigned K);

struct PrPoint {
    unsigned radius = 0;
    double precision = 0;
    double recall = 0;
};

// Operating points of the radius sweep r = 0..r_cap; recall is nondecreasing
// in r. r_cap = 0 reduces to the single pr_at_radius(0) point.
std::vector<PrPoint> pr_curve(const CodeIndex& index, const std::vector<TernaryCode>& queries,
                              const GroundTruth& gt, unsigned r_cap);

// ---- sparse-vs-dense comparison experiment -------------------------------

// The benchmark set draws `data.clusters` Gaussian modes and groups them
// into `n_classes` classes (mode id modulo n_classes; 0 keeps one class per
// mode). Multi-mode classes mirror the multimodal structure of real
// descriptor classes. Training pairs are drawn from mode identity (metric
// neighbors); retrieval quality is judged against class labels.
struct ExperimentConfig {
    SynthConfig data = {200, 32, 2000, 0.25, 1};
    size_t n_classes = 10;
    size_t n_queries = 400;            // held out from the database
    size_t n_pos_pairs = 4000;
    size_t n_neg_pairs = 4000;
    Eigen::Index m_small = 16;
    Eigen::Index m_large = 48;
    double sparse_alpha = 1.4;         // sparsity weight of the sparse run
    LossConfig loss = {0.0, 0.5, 8.0}; // margin/negative weight shared by both
    SgdConfig sgd;
    int encoder_iters = 1;
    double steepness = 1.6;
    double nn_margin = 4.0;
    double quantize_threshold = 0.0;
    std::vector<unsigned> radii = {0, 1, 2};

    ExperimentConfig() {
        sgd.learning_rate = 0.02;
        sgd.max_epochs = 16;
    }
};

struct MethodReport {
    std::string method;                // "sparse", "dense", "nnhash", "diffhash"
    Eigen::Index code_len = 0;
    double mean_sparsity = 0;          // fraction of nonzero symbols
    uint64_t unique_codes = 0;
    double avg_neighbors_r0 = 0;       // self-collision statistic
    std::map<unsigned, double> recall;
    std::map<unsigned, double> precision;
};

struct ExperimentReport {
    std::vector<MethodReport> entries;
    const MethodReport& entry(const std::string& method, Eigen::Index m) const;
};

// Trains the sparse encoder, its dense ablation, the siamese linear
// baseline and the spectral baseline on identical splits at both code
// lengths, then measures retrieval quality and collision statistics.
// Deterministic given the config seed.
ExperimentReport sparse_vs_dense_experiment(const ExperimentConfig& cfg);

}  // namespace ternhash
