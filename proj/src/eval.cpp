#include "ternhash/eval.hpp"

#include "ternhash/baselines.hpp"
#include "ternhash/encoder.hpp"

#include <algorithm>
#include <numeric>

namespace ternhash {

GroundTruth GroundTruth::from_labels(std::vector<int> query_labels, std::vector<int> db_labels) {
    GroundTruth gt;
    gt.labels_mode_ = true;
    gt.n_queries_ = query_labels.size();
    gt.n_db_ = db_labels.size();
    gt.query_labels_ = std::move(query_labels);
    gt.db_labels_ = std::move(db_labels);
    for (int l : gt.db_labels_) gt.db_label_counts_[l] += 1;
    return gt;
}

GroundTruth GroundTruth::from_pairs(size_t n_queries, size_t n_db,
                                    const std::vector<std::pair<uint32_t, uint32_t>>& relevant) {
    GroundTruth gt;
    gt.labels_mode_ = false;
    gt.n_queries_ = n_queries;
    gt.n_db_ = n_db;
    gt.relevant_by_query_.resize(n_queries);
    for (auto [q, d] : relevant) {
        check_arg(q < n_queries && d < n_db, "GroundTruth: pair index out of range");
        gt.relevant_by_query_[q].push_back(d);
    }
    for (auto& v : gt.relevant_by_query_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return gt;
}

bool GroundTruth::relevant(uint32_t query, uint32_t db_item) const {
    if (labels_mode_) {
        return query_labels_.at(query) == db_labels_.at(db_item);
    }
    const auto& v = relevant_by_query_.at(query);
    return std::binary_search(v.begin(), v.end(), db_item);
}

uint64_t GroundTruth::relevant_count(uint32_t query) const {
    if (labels_mode_) {
        auto it = db_label_counts_.find(query_labels_.at(query));
        return it == db_label_counts_.end() ? 0 : it->second;
    }
    return relevant_by_query_.at(query).size();
}

RadiusMetrics pr_at_radius(const std::vector<std::vector<uint32_t>>& results,
                           const GroundTruth& gt, unsigned radius, Averaging averaging) {
    check_arg(results.size() == gt.n_queries(), "pr_at_radius: result count != query count");

    RadiusMetrics m;
    m.radius = radius;
    double macro_p = 0, macro_r = 0;
    uint64_t macro_r_den = 0;
    for (uint32_t q = 0; q < results.size(); ++q) {
        uint64_t nrel = gt.relevant_count(q);
        uint64_t hits = 0;
        for (uint32_t id : results[q]) hits += gt.relevant(q, id);
        m.retrieved += results[q].size();
        m.relevant_retrieved += hits;
        if (nrel == 0) {
            ++m.queries_skipped;
        } else {
            m.relevant += nrel;
            macro_r += double(hits) / double(nrel);
            ++macro_r_den;
        }
        macro_p += results[q].empty() ? 0.0 : double(hits) / double(results[q].size());
    }
    if (averaging == Averaging::Micro) {
        m.precision = m.retrieved ? double(m.relevant_retrieved) / double(m.retrieved) : 0.0;
        m.recall = m.relevant ? double(m.relevant_retrieved) / double(m.relevant) : 0.0;
    } else {
        m.precision = results.empty() ? 0.0 : macro_p / double(results.size());
        m.recall = macro_r_den ? macro_r / double(macro_r_den) : 0.0;
    }
    m.f1 = (m.precision > 0 && m.recall > 0)
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

RankingMetrics mean_average_precision(const std::vector<std::vector<uint32_t>>& rankings,
                                      const GroundTruth& gt, unsigned R) {
    check_arg(R >= 1, "mean_average_precision: R must be >= 1");
    check_arg(rankings.size() == gt.n_queries(), "mean_average_precision: ranking count mismatch");

    RankingMetrics out;
    out.rank_cap = R;
    double sum_norm = 0, sum_raw = 0;
    for (uint32_t q = 0; q < rankings.size(); ++q) {
        uint64_t nrel = gt.relevant_count(q);
        if (nrel == 0) {
            ++out.queries_skipped;
            continue;
        }
        // entries beyond the ranking count as irrelevant
        size_t depth = std::min<size_t>(R, rankings[q].size());
        uint64_t hits = 0;
        double ap = 0;
        for (size_t n = 1; n <= depth; ++n) {
            if (gt.relevant(q, rankings[q][n - 1])) {
                ++hits;
                ap += double(hits) / double(n);
            }
        }
        sum_raw += ap;
        sum_norm += ap / double(std::min<uint64_t>(R, nrel));
        ++out.queries_evaluated;
    }
    out.mean_ap = out.queries_evaluated ? sum_norm / double(out.queries_evaluated) : 0.0;
    out.mean_ap_unnormalized =
        out.queries_evaluated ? sum_raw / double(out.queries_evaluated) : 0.0;
    return out;
}

RankingMetrics mean_precision_at_k(const std::vector<std::vector<uint32_t>>& rankings,
                                   const GroundTruth& gt, unsigned K) {
    check_arg(K >= 1, "mean_precision_at_k: K must be >= 1");
    check_arg(rankings.size() == gt.n_queries(), "mean_precision_at_k: ranking count mismatch");

    RankingMetrics out;
    out.top_k = K;
    double sum = 0;
    for (uint32_t q = 0; q < rankings.size(); ++q) {
        if (gt.relevant_count(q) == 0) {
            ++out.queries_skipped;
            continue;
        }
        size_t depth = std::min<size_t>(K, rankings[q].size());
        uint64_t hits = 0;
        for (size_t n = 0; n < depth; ++n) hits += gt.relevant(q, rankings[q][n]);
        sum += double(hits) / double(K);
        ++out.queries_evaluated;
    }
    out.mean_precision = out.queries_evaluated ? sum / double(out.queries_evaluated) : 0.0;
    return out;
}

std::vector<PrPoint> pr_curve(const CodeIndex& index, const std::vector<TernaryCode>& queries,
                              const GroundTruth& gt, unsigned r_cap) {
    check_arg(r_cap <= index.code_len(), "pr_curve: radius cap exceeds code length");
    check_arg(queries.size() == gt.n_queries(), "pr_curve: query count mismatch");
    check_arg(gt.n_db() == index.size(), "pr_curve: ground truth does not match index");

    // one distance pass per query, then prefix sums over the radius sweep
    std::vector<uint64_t> retrieved(r_cap + 1, 0), rel_retrieved(r_cap + 1, 0);
    uint64_t relevant_total = 0;
    for (uint32_t q = 0; q < queries.size(); ++q) {
        auto qwords = pack_words(queries[q]);
        check_dim(queries[q].size() == index.code_len(), "pr_curve: code length mismatch");
        if (gt.relevant_count(q) > 0) relevant_total += gt.relevant_count(q);
        for (size_t id = 0; id < index.size(); ++id) {
            unsigned d =
                packed_distance(index.code_words(id), qwords.data(), index.words_per_code());
            if (d <= r_cap) {
                ++retrieved[d];
                if (gt.relevant(q, uint32_t(id))) ++rel_retrieved[d];
            }
        }
    }
    std::vector<PrPoint> points(r_cap + 1);
    uint64_t ret = 0, rel = 0;
    for (unsigned r = 0; r <= r_cap; ++r) {
        ret += retrieved[r];
        rel += rel_retrieved[r];
        points[r].radius = r;
        points[r].precision = ret ? double(rel) / double(ret) : 0.0;
        points[r].recall = relevant_total ? double(rel) / double(relevant_total) : 0.0;
    }
    return points;
}

// ---- sparse-vs-dense comparison experiment --------------------------------

const MethodReport& ExperimentReport::entry(const std::string& method, Eigen::Index m) const {
    for (const auto& e : entries) {
        if (e.method == method && e.code_len == m) return e;
    }
    throw ArgumentError("ExperimentReport: no entry for " + method);
}

namespace {

MethodReport measure_method(const std::string& name, Eigen::Index m, const Mat& db_codes_cont,
                            const Mat& query_codes_cont, const GroundTruth& gt,
                            const ExperimentConfig& cfg) {
    MethodReport rep;
    rep.method = name;
    rep.code_len = m;

    std::vector<TernaryCode> db_codes, all_codes;
    db_codes.reserve(size_t(db_codes_cont.rows()));
    for (Eigen::Index i = 0; i < db_codes_cont.rows(); ++i)
        db_codes.push_back(quantize(db_codes_cont.row(i).transpose(), cfg.quantize_threshold));
    std::vector<TernaryCode> query_codes;
    for (Eigen::Index i = 0; i < query_codes_cont.rows(); ++i)
        query_codes.push_back(quantize(query_codes_cont.row(i).transpose(), cfg.quantize_threshold));

    all_codes = db_codes;
    all_codes.insert(all_codes.end(), query_codes.begin(), query_codes.end());
    double nz = 0;
    for (const auto& c : all_codes) nz += sparsity(c);
    rep.mean_sparsity = nz / double(all_codes.size());

    // collision statistics over the whole set: unique codes are buckets, and
    // the mean r=0 neighbor count is sum of squared bucket sizes over N
    CodeIndex all_index = build_index(all_codes);
    rep.unique_codes = all_index.bucket_count();
    const auto& offsets = all_index.bucket_offsets();
    uint64_t self_pairs = 0;
    for (size_t b = 0; b + 1 < offsets.size(); ++b) {
        uint64_t len = offsets[b + 1] - offsets[b];
        self_pairs += len * len;
    }
    rep.avg_neighbors_r0 = double(self_pairs) / double(all_codes.size());

    // retrieval quality
    CodeIndex db_index = build_index(db_codes);
    for (unsigned r : cfg.radii) {
        std::vector<std::vector<uint32_t>> results(query_codes.size());
        for (size_t q = 0; q < query_codes.size(); ++q)
            results[q] = query(db_index, query_codes[q], r);
        RadiusMetrics m_r = pr_at_radius(results, gt, r);
        rep.recall[r] = m_r.recall;
        rep.precision[r] = m_r.precision;
    }
    return rep;
}

}  // namespace

ExperimentReport sparse_vs_dense_experiment(const ExperimentConfig& cfg) {
    SynthData data = make_clusters(cfg.data);
    check_arg(cfg.n_queries < cfg.data.count, "experiment: query count exceeds dataset");

    // generator cluster = mode; class = mode modulo n_classes
    std::vector<int> class_labels = data.labels;
    if (cfg.n_classes > 0)
        for (auto& l : class_labels) l = l % int(cfg.n_classes);

    // deterministic random split
    Rng split_rng(cfg.data.seed ^ 0x9e3779b9ULL);
    std::vector<uint32_t> perm(cfg.data.count);
    std::iota(perm.begin(), perm.end(), 0u);
    split_rng.shuffle(perm);

    Mat queries(Eigen::Index(cfg.n_queries), data.points.cols());
    Mat db(Eigen::Index(cfg.data.count - cfg.n_queries), data.points.cols());
    std::vector<int> query_labels(cfg.n_queries), db_labels(cfg.data.count - cfg.n_queries);
    std::vector<int> db_modes(cfg.data.count - cfg.n_queries);
    for (size_t i = 0; i < cfg.n_queries; ++i) {
        queries.row(Eigen::Index(i)) = data.points.row(perm[i]);
        query_labels[i] = class_labels[perm[i]];
    }
    for (size_t i = cfg.n_queries; i < cfg.data.count; ++i) {
        db.row(Eigen::Index(i - cfg.n_queries)) = data.points.row(perm[i]);
        db_labels[i - cfg.n_queries] = class_labels[perm[i]];
        db_modes[i - cfg.n_queries] = data.labels[perm[i]];
    }
    GroundTruth gt = GroundTruth::from_labels(query_labels, db_labels);
    // training pairs come from mode identity; evaluation from class labels
    std::vector<PairSample> pairs =
        make_pairs_from_labels(db_modes, cfg.n_pos_pairs, cfg.n_neg_pairs, cfg.data.seed ^ 0x51u);

    ExperimentReport report;
    for (Eigen::Index m : {cfg.m_small, cfg.m_large}) {
        EncoderParams init =
            init_params(db, m, cfg.encoder_iters, cfg.steepness, cfg.data.seed ^ 0x1317u);

        for (const char* method : {"sparse", "dense"}) {
            LossConfig loss = cfg.loss;
            loss.sparsity_weight = std::string(method) == "sparse" ? cfg.sparse_alpha : 0.0;
            TrainResult tr = train(db, pairs, loss, cfg.sgd, init);
            report.entries.push_back(measure_method(method, m, encode_batch(tr.params, db),
                                                    encode_batch(tr.params, queries), gt, cfg));
        }
        {
            NnHashConfig nn;
            nn.m = m;
            nn.margin = cfg.nn_margin;
            nn.steepness = cfg.steepness;
            nn.sgd = cfg.sgd;
            NnHashTrainResult nnr = nnhash_train(db, pairs, nn);
            report.entries.push_back(
                measure_method("nnhash", m, linear_encode_batch(nnr.params, db, nn.steepness),
                               linear_encode_batch(nnr.params, queries, nn.steepness), gt, cfg));
        }
        if (m <= db.cols()) {
            // the spectral fit needs m orthonormal rows, impossible past the
            // input dimension
            DiffHashResult dh = diffhash_fit(db, pairs, m);
            report.entries.push_back(
                measure_method("diffhash", m, linear_encode_batch(dh.params, db, cfg.steepness),
                               linear_encode_batch(dh.params, queries, cfg.steepness), gt, cfg));
        }
    }
    return report;
}

}  // namespace ternhash
