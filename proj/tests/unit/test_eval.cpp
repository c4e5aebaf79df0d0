#include "ternhash/eval.hpp"

#include <doctest.h>

#include <set>

using namespace ternhash;

namespace {

TernaryCode random_code(Rng& rng, size_t m) {
    std::vector<int8_t> s(m);
    for (auto& v : s) v = int8_t(int(rng.index(3)) - 1);
    return TernaryCode(std::move(s));
}

}  // namespace

TEST_CASE("pr_at_radius trivial and hand-counted cases") {
    // 3 queries, 6 db items; labels give queries 0,1 two relevant items each
    GroundTruth gt = GroundTruth::from_labels({0, 1, 2}, {0, 0, 1, 1, 3, 3});

    // exact retrieval for query 0 and 1
    RadiusMetrics perfect = pr_at_radius({{0, 1}, {2, 3}, {}}, gt, 0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);
    CHECK(perfect.queries_skipped == 1);  // query 2 has no relevant items

    RadiusMetrics empty = pr_at_radius({{}, {}, {}}, gt, 1);
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);

    // hand-counted confusion totals:
    // q0 retrieves {0,4}: 1 relevant of 2 retrieved
    // q1 retrieves {2}: 1 relevant of 1 retrieved
    // q2 retrieves {4,5}: relevant set empty
    RadiusMetrics hand = pr_at_radius({{0, 4}, {2}, {4, 5}}, gt, 2);
    CHECK(hand.retrieved == 5);
    CHECK(hand.relevant_retrieved == 2);
    CHECK(hand.relevant == 4);
    CHECK(hand.precision == doctest::Approx(2.0 / 5.0));
    CHECK(hand.recall == doctest::Approx(2.0 / 4.0));
    double p = 2.0 / 5.0, r = 0.5;
    CHECK(hand.f1 == doctest::Approx(2 * p * r / (p + r)));

    // macro averaging: mean of per-query rates
    RadiusMetrics macro = pr_at_radius({{0, 4}, {2}, {4, 5}}, gt, 2, Averaging::Macro);
    CHECK(macro.precision == doctest::Approx((0.5 + 1.0 + 0.0) / 3.0));
    CHECK(macro.recall == doctest::Approx((0.5 + 0.5) / 2.0));
}

TEST_CASE("mean_average_precision frozen example") {
    // one query; ranking (relevant, irrelevant, relevant); two relevant total
    GroundTruth gt = GroundTruth::from_pairs(1, 3, {{0, 0}, {0, 2}});
    RankingMetrics m = mean_average_precision({{0, 1, 2}}, gt, 3);
    // P(1)=1 at rank 1, P(3)=2/3 at rank 3; normalizer min(3, 2) = 2
    CHECK(m.mean_ap == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(m.mean_ap_unnormalized == doctest::Approx(1.0 + 2.0 / 3.0).epsilon(1e-12));

    // all top-R relevant
    GroundTruth all = GroundTruth::from_pairs(1, 3, {{0, 0}, {0, 1}, {0, 2}});
    CHECK(mean_average_precision({{0, 1, 2}}, all, 3).mean_ap == 1.0);

    // nothing relevant in top-R
    GroundTruth none = GroundTruth::from_pairs(1, 4, {{0, 3}});
    CHECK(mean_average_precision({{0, 1, 2}}, none, 3).mean_ap == 0.0);

    CHECK_THROWS_AS(mean_average_precision({{0}}, gt, 0), ArgumentError);
}

TEST_CASE("mean_precision_at_k hand counts") {
    GroundTruth gt = GroundTruth::from_labels({0, 1}, {0, 0, 1, 1});
    // q0 top-2: {0 (rel), 2 (irr)}; q1 top-2: {2 (rel), 3 (rel)}
    RankingMetrics m = mean_precision_at_k({{0, 2}, {2, 3}}, gt, 2);
    CHECK(m.mean_precision == doctest::Approx((0.5 + 1.0) / 2.0));

    CHECK(mean_precision_at_k({{1}, {0}}, gt, 1).mean_precision ==
          doctest::Approx(0.5));  // q0 hits, q1 misses
    CHECK_THROWS_AS(mean_precision_at_k({{0}, {0}}, gt, 0), ArgumentError);
}

TEST_CASE("metrics agree with brute-force references on a random instance") {
    Rng rng(81);
    const size_t n_q = 50, n_db = 500, m = 12;
    std::vector<TernaryCode> db, queries;
    for (size_t i = 0; i < n_db; ++i) db.push_back(random_code(rng, m));
    for (size_t i = 0; i < n_q; ++i) queries.push_back(random_code(rng, m));
    std::vector<int> db_labels(n_db), q_labels(n_q);
    for (auto& l : db_labels) l = int(rng.index(5));
    for (auto& l : q_labels) l = int(rng.index(5));

    GroundTruth gt = GroundTruth::from_labels(q_labels, db_labels);
    CodeIndex index = build_index(db);

    const unsigned R = 20, K = 10;
    std::vector<std::vector<uint32_t>> results(n_q), rankings(n_q);
    for (size_t q = 0; q < n_q; ++q) {
        results[q] = query(index, queries[q], 3);
        rankings[q] = rank_all(index, queries[q], n_db);
    }

    // radius metrics against integer-count references
    RadiusMetrics got = pr_at_radius(results, gt, 3);
    uint64_t retrieved = 0, rel_retrieved = 0, relevant = 0;
    for (size_t q = 0; q < n_q; ++q) {
        uint64_t nrel = 0;
        for (size_t d = 0; d < n_db; ++d) nrel += db_labels[d] == q_labels[q];
        if (nrel) relevant += nrel;
        retrieved += results[q].size();
        for (uint32_t id : results[q]) rel_retrieved += db_labels[id] == q_labels[q];
    }
    CHECK(got.retrieved == retrieved);
    CHECK(got.relevant == relevant);
    CHECK(got.relevant_retrieved == rel_retrieved);
    CHECK(got.precision == double(rel_retrieved) / double(retrieved));
    CHECK(got.recall == double(rel_retrieved) / double(relevant));

    // mAP / MP against a from-scratch loop
    RankingMetrics map_got = mean_average_precision(rankings, gt, R);
    RankingMetrics mp_got = mean_precision_at_k(rankings, gt, K);
    double map_sum = 0, mp_sum = 0;
    uint64_t evaluated = 0;
    for (size_t q = 0; q < n_q; ++q) {
        uint64_t nrel = 0;
        for (size_t d = 0; d < n_db; ++d) nrel += db_labels[d] == q_labels[q];
        if (!nrel) continue;
        ++evaluated;
        uint64_t hits = 0;
        double ap = 0;
        for (unsigned rank = 1; rank <= R; ++rank) {
            if (db_labels[rankings[q][rank - 1]] == q_labels[q]) {
                ++hits;
                ap += double(hits) / double(rank);
            }
        }
        map_sum += ap / double(std::min<uint64_t>(R, nrel));
        uint64_t topk = 0;
        for (unsigned rank = 0; rank < K; ++rank)
            topk += db_labels[rankings[q][rank]] == q_labels[q];
        mp_sum += double(topk) / double(K);
    }
    CHECK(map_got.queries_evaluated == evaluated);
    CHECK(map_got.mean_ap == map_sum / double(evaluated));
    CHECK(mp_got.mean_precision == mp_sum / double(evaluated));

    // mAP at depth one is mean precision at one, exactly
    CHECK(mean_average_precision(rankings, gt, 1).mean_ap ==
          mean_precision_at_k(rankings, gt, 1).mean_precision);
}

TEST_CASE("ranking metrics stay within the unit interval") {
    Rng rng(82);
    for (int it = 0; it < 20; ++it) {
        size_t n_q = 1 + rng.index(6), n_db = 5 + rng.index(40);
        std::vector<int> dbl(n_db), ql(n_q);
        for (auto& l : dbl) l = int(rng.index(3));
        for (auto& l : ql) l = int(rng.index(4));  // some queries lack matches
        GroundTruth gt = GroundTruth::from_labels(ql, dbl);
        std::vector<std::vector<uint32_t>> rankings(n_q);
        for (auto& r : rankings) {
            size_t len = rng.index(n_db + 1);
            std::set<uint32_t> used;
            while (used.size() < len) used.insert(uint32_t(rng.index(n_db)));
            r.assign(used.begin(), used.end());
            rng.shuffle(r);
        }
        RankingMetrics map_m = mean_average_precision(rankings, gt, 7);
        RankingMetrics mp_m = mean_precision_at_k(rankings, gt, 4);
        RadiusMetrics pr = pr_at_radius(rankings, gt, 1);
        for (double v : {map_m.mean_ap, mp_m.mean_precision, pr.precision, pr.recall, pr.f1}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("pr_curve sweeps radii consistently") {
    Rng rng(83);
    const size_t m = 8, n_db = 200, n_q = 20;
    std::vector<TernaryCode> db, queries;
    for (size_t i = 0; i < n_db; ++i) db.push_back(random_code(rng, m));
    for (size_t i = 0; i < n_q; ++i) queries.push_back(random_code(rng, m));
    std::vector<int> dbl(n_db), ql(n_q);
    for (auto& l : dbl) l = int(rng.index(4));
    for (auto& l : ql) l = int(rng.index(4));
    GroundTruth gt = GroundTruth::from_labels(ql, dbl);
    CodeIndex index = build_index(db);

    auto curve = pr_curve(index, queries, gt, unsigned(m));
    REQUIRE(curve.size() == m + 1);

    // against a per-radius query oracle
    for (unsigned r = 0; r <= m; ++r) {
        std::vector<std::vector<uint32_t>> results(n_q);
        for (size_t q = 0; q < n_q; ++q) results[q] = query(index, queries[q], r);
        RadiusMetrics ref = pr_at_radius(results, gt, r);
        CHECK(curve[r].precision == doctest::Approx(ref.precision).epsilon(1e-12));
        CHECK(curve[r].recall == doctest::Approx(ref.recall).epsilon(1e-12));
        if (r > 0) CHECK(curve[r].recall >= curve[r - 1].recall);
    }

    // the zero-radius curve is the single collision operating point
    auto point = pr_curve(index, queries, gt, 0);
    REQUIRE(point.size() == 1);
    std::vector<std::vector<uint32_t>> r0(n_q);
    for (size_t q = 0; q < n_q; ++q) r0[q] = query(index, queries[q], 0);
    RadiusMetrics ref0 = pr_at_radius(r0, gt, 0);
    CHECK(point[0].precision == doctest::Approx(ref0.precision));
    CHECK(point[0].recall == doctest::Approx(ref0.recall));

    CHECK_THROWS_AS(pr_curve(index, queries, gt, unsigned(m) + 1), ArgumentError);
}

TEST_CASE("experiment report is symmetric under swapping the code lengths") {
    ExperimentConfig cfg;
    cfg.data = {20, 8, 300, 0.3, 7};
    cfg.n_classes = 4;
    cfg.n_queries = 60;
    cfg.n_pos_pairs = cfg.n_neg_pairs = 300;
    cfg.m_small = 6;
    cfg.m_large = 8;
    cfg.sgd.max_epochs = 4;
    ExperimentReport ab = sparse_vs_dense_experiment(cfg);
    std::swap(cfg.m_small, cfg.m_large);
    ExperimentReport ba = sparse_vs_dense_experiment(cfg);

    for (const char* method : {"sparse", "dense", "nnhash", "diffhash"}) {
        for (Eigen::Index m : {6, 8}) {
            const MethodReport& x = ab.entry(method, m);
            const MethodReport& y = ba.entry(method, m);
            CHECK(x.mean_sparsity == y.mean_sparsity);
            CHECK(x.unique_codes == y.unique_codes);
            CHECK(x.recall == y.recall);
        }
    }
}
