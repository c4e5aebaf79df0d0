// ternhash command line: synthetic data, training, encoding, indexing,
// querying, evaluation and benchmarking of sparse ternary hash codes.

#include "ternhash/io.hpp"
#include "ternhash/multimodal.hpp"
#include "ternhash/retrieval.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace ternhash;
using nlohmann::json;

namespace {

// ---- flat key=value run configuration -------------------------------------

const std::vector<std::string> kKnownKeys = {
    "method",
    "model.m", "model.iters", "model.steepness", "model.theta", "model.alphabet",
    "loss.alpha", "loss.lambda", "loss.margin",
    "sgd.lr", "sgd.decay", "sgd.momentum", "sgd.batch", "sgd.epochs", "sgd.seed",
    "sgd.shuffle", "sgd.workers",
    "data.features", "data.labels", "data.pairs", "data.features_y", "data.pairs_mm",
    "pairs.positive", "pairs.negative",
    "mm.mu1", "mm.mu2",
};

struct RunConfig {
    std::map<std::string, std::string> kv;

    static RunConfig parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw DataError("cannot open config: " + path);
        RunConfig cfg;
        std::string line;
        size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                size_t b = s.find_first_not_of(" \t\r");
                size_t e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            if (trim(line).empty()) continue;
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
                throw ArgumentError("config: unknown key '" + key + "'");
            if (cfg.kv.count(key)) throw ArgumentError("config: duplicate key '" + key + "'");
            cfg.kv[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& k) const { return kv.count(k) > 0; }

    std::string str(const std::string& k, const std::string& dflt = "") const {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : it->second;
    }
    std::string require(const std::string& k) const {
        auto it = kv.find(k);
        if (it == kv.end()) throw ArgumentError("config: missing required key '" + k + "'");
        return it->second;
    }
    double num(const std::string& k, double dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ArgumentError("config: key '" + k + "' is not a number");
        }
    }
    int64_t integer(const std::string& k, int64_t dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        try {
            return std::stoll(it->second);
        } catch (const std::exception&) {
            throw ArgumentError("config: key '" + k + "' is not an integer");
        }
    }
    bool flag(const std::string& k, bool dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ArgumentError("config: key '" + k + "' must be true/false");
    }

    // canonical serialization (sorted keys) and its hash
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        return out;
    }
    std::string hash() const {
        std::string c = canonical();
        return hex64(fnv1a(c.data(), c.size()));
    }
};

SgdConfig sgd_from_config(const RunConfig& cfg) {
    SgdConfig sgd;
    sgd.learning_rate = cfg.num("sgd.lr", 0.05);
    sgd.decay = cfg.num("sgd.decay", 0.98);
    sgd.momentum = cfg.num("sgd.momentum", 0.9);
    sgd.max_epochs = int(cfg.integer("sgd.epochs", 250));
    sgd.batch_size = int(cfg.integer("sgd.batch", 32));
    sgd.seed = uint64_t(cfg.integer("sgd.seed", 1));
    sgd.shuffle = cfg.flag("sgd.shuffle", true);
    sgd.workers = int(cfg.integer("sgd.workers", 1));
    return sgd;
}

LossConfig loss_from_config(const RunConfig& cfg) {
    LossConfig loss;
    loss.sparsity_weight = cfg.num("loss.alpha", 0.01);
    loss.negative_weight = cfg.num("loss.lambda", 0.1);
    loss.margin = cfg.num("loss.margin", 8.0);
    return loss;
}

std::vector<PairSample> pairs_for_training(const RunConfig& cfg, const std::vector<int>& labels,
                                           uint64_t seed) {
    if (cfg.has("data.pairs")) return load_pairs(cfg.require("data.pairs"));
    if (labels.empty())
        throw ArgumentError("config: need data.pairs or data.labels to form training pairs");
    size_t n_pos = size_t(cfg.integer("pairs.positive", 2000));
    size_t n_neg = size_t(cfg.integer("pairs.negative", 2000));
    return make_pairs_from_labels(labels, n_pos, n_neg, seed);
}

std::vector<MultimodalPair> load_mm_pairs(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open for reading: " + path);
    std::vector<MultimodalPair> pairs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string kind;
        uint32_t a, b;
        int s;
        if (!(ss >> kind >> a >> b >> s) || (s != 0 && s != 1))
            throw DataError(path + ": bad pair at line " + std::to_string(lineno));
        MultimodalPair p;
        if (kind == "xx") p.kind = PairKind::XX;
        else if (kind == "yy") p.kind = PairKind::YY;
        else if (kind == "xy") p.kind = PairKind::XY;
        else throw DataError(path + ": bad pair kind '" + kind + "' at line " +
                             std::to_string(lineno));
        p.a = a;
        p.b = b;
        p.label = uint8_t(s);
        pairs.push_back(p);
    }
    return pairs;
}

std::vector<unsigned> parse_radii(const std::string& csv) {
    std::vector<unsigned> radii;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        radii.push_back(unsigned(std::stoul(tok)));
    }
    if (radii.empty()) throw ArgumentError("empty radius list");
    return radii;
}

Alphabet parse_alphabet(const std::string& s) {
    if (s == "ternary") return Alphabet::Ternary;
    if (s == "binary") return Alphabet::Binary;
    throw ArgumentError("alphabet must be 'ternary' or 'binary', got '" + s + "'");
}

// ---- subcommand payloads ---------------------------------------------------

int run_synth(const std::string& out, const std::string& labels_path,
              const std::string& pairs_path, size_t clusters, size_t dim, size_t count,
              double spread, uint64_t seed, size_t n_pos, size_t n_neg) {
    SynthConfig cfg{clusters, dim, count, spread, seed};
    SynthData data = make_clusters(cfg);
    save_matrix(data.points, out);
    if (!labels_path.empty()) save_labels(data.labels, labels_path);
    if (!pairs_path.empty()) {
        auto pairs = make_pairs_from_labels(data.labels, n_pos, n_neg, seed ^ 0x70a1u);
        save_pairs(pairs, pairs_path);
    }
    std::cout << "wrote " << count << " x " << dim << " features to " << out << "\n";
    return 0;
}

int run_train(const std::string& config_path, const std::string& out_root) {
    RunConfig cfg = RunConfig::parse_file(config_path);
    std::string method = cfg.str("method", "ista");
    fs::path run_dir = fs::path(out_root) / cfg.hash();
    fs::create_directories(run_dir);

    {
        std::ofstream rc(run_dir / "resolved.cfg");
        rc << cfg.canonical();
    }

    Mat features = load_matrix(cfg.require("data.features"));
    std::vector<int> labels;
    if (cfg.has("data.labels")) labels = load_labels(cfg.require("data.labels"));
    uint64_t seed = uint64_t(cfg.integer("sgd.seed", 1));

    CheckpointMeta meta;
    meta.seed = seed;
    meta.config_hash = cfg.hash();

    if (method == "ista" || method == "sparse") {
        auto pairs = pairs_for_training(cfg, labels, seed ^ 0x9a17u);
        EncoderParams init = init_params(features, Eigen::Index(cfg.integer("model.m", 48)),
                                         int(cfg.integer("model.iters", 1)),
                                         cfg.num("model.steepness", 3.0), seed);
        TrainResult tr = train(features, pairs, loss_from_config(cfg), sgd_from_config(cfg), init);
        Checkpoint ckpt;
        ckpt.method = Method::Ista;
        ckpt.encoder = tr.params;
        ckpt.steepness = tr.params.steepness;
        save_checkpoint(ckpt, meta, (run_dir / "checkpoint.bin").string());
        save_train_log(tr.log, (run_dir / "train_log.tsv").string());
    } else if (method == "nnhash") {
        auto pairs = pairs_for_training(cfg, labels, seed ^ 0x9a17u);
        NnHashConfig nn;
        nn.m = Eigen::Index(cfg.integer("model.m", 48));
        nn.margin = cfg.num("loss.margin", 4.0);
        nn.steepness = cfg.num("model.steepness", 3.0);
        nn.sgd = sgd_from_config(cfg);
        NnHashTrainResult tr = nnhash_train(features, pairs, nn);
        Checkpoint ckpt;
        ckpt.method = Method::NnHash;
        ckpt.linear = tr.params;
        ckpt.steepness = nn.steepness;
        save_checkpoint(ckpt, meta, (run_dir / "checkpoint.bin").string());
        save_train_log(tr.log, (run_dir / "train_log.tsv").string());
    } else if (method == "diffhash") {
        auto pairs = pairs_for_training(cfg, labels, seed ^ 0x9a17u);
        DiffHashResult dh = diffhash_fit(features, pairs, Eigen::Index(cfg.integer("model.m", 48)));
        for (const auto& w : dh.warnings) std::cerr << "warning: " << w << "\n";
        Checkpoint ckpt;
        ckpt.method = Method::DiffHash;
        ckpt.linear = dh.params;
        ckpt.steepness = cfg.num("model.steepness", 3.0);
        save_checkpoint(ckpt, meta, (run_dir / "checkpoint.bin").string());
    } else if (method == "multimodal") {
        Mat features_y = load_matrix(cfg.require("data.features_y"));
        auto pairs = load_mm_pairs(cfg.require("data.pairs_mm"));
        MultimodalConfig mm;
        mm.intra_x_weight = cfg.num("mm.mu1", 0.0);
        mm.intra_y_weight = cfg.num("mm.mu2", 0.0);
        mm.loss_x = mm.loss_y = mm.loss_xy = loss_from_config(cfg);
        mm.sgd = sgd_from_config(cfg);
        Eigen::Index m = Eigen::Index(cfg.integer("model.m", 48));
        int iters = int(cfg.integer("model.iters", 1));
        double steep = cfg.num("model.steepness", 3.0);
        EncoderParams init_x = init_params(features, m, iters, steep, seed);
        EncoderParams init_y = init_params(features_y, m, iters, steep, seed + 1);
        MultimodalTrainResult tr = mm_train(features, features_y, pairs, mm, init_x, init_y);

        Checkpoint cx;
        cx.method = Method::Ista;
        cx.encoder = tr.params_x;
        cx.steepness = steep;
        save_checkpoint(cx, meta, (run_dir / "checkpoint_x.bin").string());
        Checkpoint cy;
        cy.method = Method::Ista;
        cy.encoder = tr.params_y;
        cy.steepness = steep;
        save_checkpoint(cy, meta, (run_dir / "checkpoint_y.bin").string());
        save_train_log(tr.log, (run_dir / "train_log.tsv").string());
        json manifest;
        manifest["modalities"] = {"x", "y"};
        manifest["m"] = m;
        manifest["config_hash"] = cfg.hash();
        manifest["checkpoints"] = {"checkpoint_x.bin", "checkpoint_y.bin"};
        std::ofstream mf(run_dir / "manifest.json");
        mf << manifest.dump(2) << "\n";
    } else {
        throw ArgumentError("config: unknown method '" + method + "'");
    }
    std::cout << run_dir.string() << "\n";
    return 0;
}

int run_encode(const std::string& ckpt_path, const std::string& features_path,
               const std::string& out, double theta) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Mat features = load_matrix(features_path);
    if (features.cols() != ckpt.input_dim())
        throw DimensionError("encode: feature dimension " + std::to_string(features.cols()) +
                             " does not match checkpoint " + std::to_string(ckpt.input_dim()));
    Mat continuous = ckpt.encode_batch(features);
    std::vector<TernaryCode> codes;
    codes.reserve(size_t(continuous.rows()));
    double total_sparsity = 0;
    for (Eigen::Index i = 0; i < continuous.rows(); ++i) {
        codes.push_back(quantize(continuous.row(i).transpose(), theta));
        total_sparsity += sparsity(codes.back());
    }
    save_codes(codes, out);
    std::cout << "mean sparsity " << total_sparsity / double(codes.size()) << "\n";
    return 0;
}

int run_index(const std::string& codes_path, const std::string& out, const std::string& alphabet,
              double scan_cost, bool calibrate) {
    auto codes = load_codes(codes_path);
    CodeIndex index = build_index(codes, parse_alphabet(alphabet), scan_cost);
    if (calibrate) index.set_scan_cost(calibrate_scan_cost(index));
    save_index(index, out);
    std::cout << "indexed " << index.size() << " codes, " << index.bucket_count()
              << " unique, scan cost " << index.scan_cost() << "\n";
    return 0;
}

Strategy parse_strategy(const std::string& s) {
    if (s == "auto") return Strategy::Auto;
    if (s == "probe") return Strategy::LutProbe;
    if (s == "scan") return Strategy::BruteForce;
    if (s == "exact") return Strategy::LutExact;
    throw ArgumentError("strategy must be auto|probe|scan|exact, got '" + s + "'");
}

int run_query(const std::string& index_path, const std::string& code_text,
              const std::string& codes_path, int64_t code_id, unsigned r,
              const std::string& strategy) {
    CodeIndex index = load_index(index_path);
    TernaryCode q;
    if (!code_text.empty()) {
        q = TernaryCode::from_text(code_text);
    } else if (!codes_path.empty()) {
        auto codes = load_codes(codes_path);
        if (code_id < 0 || size_t(code_id) >= codes.size())
            throw ArgumentError("query: --id out of range");
        q = codes[size_t(code_id)];
    } else {
        throw ArgumentError("query: need --code or --codes with --id");
    }
    auto ids = query(index, q, r, parse_strategy(strategy));
    for (size_t i = 0; i < ids.size(); ++i) std::cout << (i ? " " : "") << ids[i];
    std::cout << "\n";
    return 0;
}

int run_eval(const std::string& index_path, const std::string& queries_path,
             const std::string& query_labels_path, const std::string& db_labels_path,
             const std::string& gt_pairs_path, const std::string& radii_csv, unsigned map_r,
             unsigned mp_k, int64_t curve_cap, const std::string& out_dir) {
    CodeIndex index = load_index(index_path);
    auto queries = load_codes(queries_path);

    GroundTruth gt = [&] {
        if (!gt_pairs_path.empty()) {
            auto raw = load_pairs(gt_pairs_path);
            std::vector<std::pair<uint32_t, uint32_t>> rel;
            for (const auto& p : raw)
                if (p.label) rel.emplace_back(p.a, p.b);
            return GroundTruth::from_pairs(queries.size(), index.size(), rel);
        }
        if (query_labels_path.empty() || db_labels_path.empty())
            throw ArgumentError("eval: need --gt-pairs or both --query-labels and --db-labels");
        return GroundTruth::from_labels(load_labels(query_labels_path),
                                        load_labels(db_labels_path));
    }();
    if (gt.n_queries() != queries.size())
        throw DataError("eval: ground truth query count does not match codes");

    fs::create_directories(out_dir);
    MetricReport report;
    for (unsigned r : parse_radii(radii_csv)) {
        std::vector<std::vector<uint32_t>> results(queries.size());
        for (size_t qi = 0; qi < queries.size(); ++qi) results[qi] = query(index, queries[qi], r);
        report.per_radius.push_back(pr_at_radius(results, gt, r));
    }
    std::vector<std::vector<uint32_t>> rankings(queries.size());
    for (size_t qi = 0; qi < queries.size(); ++qi)
        rankings[qi] = rank_all(index, queries[qi], std::min<size_t>(index.size(),
                                                                     std::max(map_r, mp_k)));
    RankingMetrics mapm = mean_average_precision(rankings, gt, map_r);
    RankingMetrics mpm = mean_precision_at_k(rankings, gt, mp_k);
    report.ranking = mapm;
    report.ranking.top_k = mpm.top_k;
    report.ranking.mean_precision = mpm.mean_precision;

    save_metric_report_tsv(report, (fs::path(out_dir) / "report.tsv").string());
    save_metric_report_json(report, (fs::path(out_dir) / "report.json").string());
    if (curve_cap >= 0) {
        auto points = pr_curve(index, queries, gt, unsigned(curve_cap));
        save_pr_curve(points, (fs::path(out_dir) / "pr_curve.tsv").string());
    }
    std::cout << "wrote report to " << out_dir << "\n";
    return 0;
}

int run_bench(const std::string& index_path, const std::string& queries_path,
              const std::string& radii_csv, size_t n_queries, const std::string& out) {
    CodeIndex index = load_index(index_path);
    index.set_scan_cost(calibrate_scan_cost(index));

    std::vector<TernaryCode> queries;
    if (!queries_path.empty()) {
        queries = load_codes(queries_path);
    } else {
        Rng rng(7);
        for (size_t i = 0; i < n_queries; ++i)
            queries.push_back(index.code(size_t(rng.index(index.size()))));
    }
    if (queries.size() > n_queries) queries.resize(n_queries);

    std::ofstream os(out);
    if (!os) throw DataError("cannot open for writing: " + out);
    os << "r\tstrategy\tqueries\tp50_us\tp90_us\tp99_us\tmean_us\tplanned\n";

    using clock = std::chrono::steady_clock;
    for (unsigned r : parse_radii(radii_csv)) {
        QueryPlan plan = plan_query(index, r);
        for (Strategy strat : {Strategy::LutProbe, Strategy::BruteForce}) {
            std::vector<double> us;
            us.reserve(queries.size());
            for (const auto& q : queries) {
                auto t0 = clock::now();
                volatile size_t sink = query(index, q, r, strat).size();
                (void)sink;
                us.push_back(double(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        clock::now() - t0)
                                        .count()) /
                             1e3);
            }
            std::sort(us.begin(), us.end());
            auto pct = [&](double p) { return us[size_t(p * double(us.size() - 1))]; };
            double mean = 0;
            for (double v : us) mean += v;
            mean /= double(us.size());
            os << r << "\t" << strategy_name(strat) << "\t" << us.size() << "\t" << pct(0.50)
               << "\t" << pct(0.90) << "\t" << pct(0.99) << "\t" << mean << "\t"
               << strategy_name(plan.strategy) << "\n";
        }
    }
    std::cout << "wrote bench table to " << out << "\n";
    return 0;
}

int run_experiment(size_t clusters, size_t classes, size_t dim, size_t count, double spread,
                   uint64_t seed, Eigen::Index m_small, Eigen::Index m_large, double alpha,
                   double margin, double lambda, double lr, int epochs, double steepness,
                   const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.data = SynthConfig{clusters, dim, count, spread, seed};
    cfg.n_classes = classes;
    cfg.m_small = m_small;
    cfg.m_large = m_large;
    cfg.sparse_alpha = alpha;
    cfg.loss.margin = margin;
    cfg.loss.negative_weight = lambda;
    cfg.sgd.learning_rate = lr;
    cfg.sgd.max_epochs = epochs;
    cfg.sgd.seed = seed;
    cfg.steepness = steepness;
    ExperimentReport report = sparse_vs_dense_experiment(cfg);
    fs::create_directories(out_dir);
    save_experiment_report(report, (fs::path(out_dir) / "experiment.tsv").string(),
                           (fs::path(out_dir) / "experiment.json").string());
    std::cout << "wrote experiment report to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned sparse ternary hashing: train, encode, index, query, evaluate"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate Gaussian cluster data");
    std::string synth_out, synth_labels, synth_pairs;
    size_t clusters = 10, dim = 32, count = 2000, n_pos = 2000, n_neg = 2000;
    double spread = 0.5;
    uint64_t synth_seed = 1;
    synth->add_option("--out", synth_out, "output feature file")->required();
    synth->add_option("--labels", synth_labels, "output labels file");
    synth->add_option("--pairs", synth_pairs, "output pairs file");
    synth->add_option("--clusters", clusters);
    synth->add_option("--dim", dim);
    synth->add_option("--count", count);
    synth->add_option("--spread", spread);
    synth->add_option("--seed", synth_seed);
    synth->add_option("--pos", n_pos, "positive pairs to draw (with --pairs)");
    synth->add_option("--neg", n_neg, "negative pairs to draw (with --pairs)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train or fit a hashing model from a config");
    std::string train_config, train_out = "runs";
    train_cmd->add_option("--config", train_config, "key = value config file")->required();
    train_cmd->add_option("--out", train_out, "root directory for run outputs");

    // encode
    auto* encode = app.add_subcommand("encode", "encode features to packed ternary codes");
    std::string enc_ckpt, enc_features, enc_out;
    double theta = 0.0;
    encode->add_option("--checkpoint", enc_ckpt)->required();
    encode->add_option("--features", enc_features)->required();
    encode->add_option("--out", enc_out)->required();
    encode->add_option("--theta", theta, "quantization threshold (default 0)");

    // index
    auto* index_cmd = app.add_subcommand("index", "build a collision index from codes");
    std::string idx_codes, idx_out, idx_alphabet = "ternary";
    double idx_scan_cost = kDefaultScanCost;
    bool idx_calibrate = false;
    index_cmd->add_option("--codes", idx_codes)->required();
    index_cmd->add_option("--out", idx_out)->required();
    index_cmd->add_option("--alphabet", idx_alphabet, "ternary|binary");
    index_cmd->add_option("--scan-cost", idx_scan_cost, "per-item scan cost in probe units");
    index_cmd->add_flag("--calibrate", idx_calibrate, "measure scan cost on this machine");

    // query
    auto* query_cmd = app.add_subcommand("query", "radius search in an index");
    std::string q_index, q_code, q_codes, q_strategy = "auto";
    int64_t q_id = -1;
    unsigned q_r = 0;
    query_cmd->add_option("--index", q_index)->required();
    query_cmd->add_option("--code", q_code, "query code as text, e.g. +-0+");
    query_cmd->add_option("--codes", q_codes, "packed codes file");
    query_cmd->add_option("--id", q_id, "row in --codes to use as the query");
    query_cmd->add_option("--r", q_r, "Hamming radius");
    query_cmd->add_option("--strategy", q_strategy, "auto|probe|scan|exact");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "retrieval quality metrics");
    std::string e_index, e_queries, e_qlabels, e_dblabels, e_gtpairs, e_radii = "0,1,2",
                e_out = "eval_out";
    unsigned e_map_r = 10, e_mp_k = 10;
    int64_t e_curve_cap = -1;
    eval_cmd->add_option("--index", e_index)->required();
    eval_cmd->add_option("--queries", e_queries, "packed query codes")->required();
    eval_cmd->add_option("--query-labels", e_qlabels);
    eval_cmd->add_option("--db-labels", e_dblabels);
    eval_cmd->add_option("--gt-pairs", e_gtpairs, "explicit relevance pairs (query db 1)");
    eval_cmd->add_option("--radii", e_radii, "comma separated radii");
    eval_cmd->add_option("--map-r", e_map_r, "ranking depth R for mAP");
    eval_cmd->add_option("--mp-k", e_mp_k, "K for mean precision");
    eval_cmd->add_option("--curve-cap", e_curve_cap, "emit PR curve up to this radius");
    eval_cmd->add_option("--out", e_out, "output directory");

    // bench
    auto* bench = app.add_subcommand("bench", "probe-vs-scan latency sweep");
    std::string b_index, b_queries, b_radii = "0,1,2,3,4", b_out = "bench.tsv";
    size_t b_nq = 100;
    bench->add_option("--index", b_index)->required();
    bench->add_option("--queries", b_queries, "packed query codes (default: sampled from index)");
    bench->add_option("--radii", b_radii);
    bench->add_option("--n", b_nq, "number of query repetitions");
    bench->add_option("--out", b_out);

    // experiment
    auto* exp = app.add_subcommand("experiment", "sparse vs dense comparison on synthetic data");
    size_t x_clusters = 200, x_classes = 10, x_dim = 32, x_count = 2000;
    double x_spread = 0.25, x_alpha = 1.4, x_margin = 8.0, x_lambda = 0.5, x_lr = 0.02,
           x_steepness = 1.6;
    uint64_t x_seed = 1;
    int64_t x_m_small = 16, x_m_large = 48;
    int x_epochs = 16;
    std::string x_out = "experiment_out";
    exp->add_option("--clusters", x_clusters, "Gaussian modes in the benchmark set");
    exp->add_option("--classes", x_classes, "classes the modes are grouped into (0: one per mode)");
    exp->add_option("--steepness", x_steepness);
    exp->add_option("--dim", x_dim);
    exp->add_option("--count", x_count);
    exp->add_option("--spread", x_spread);
    exp->add_option("--seed", x_seed);
    exp->add_option("--m-small", x_m_small);
    exp->add_option("--m-large", x_m_large);
    exp->add_option("--alpha", x_alpha);
    exp->add_option("--margin", x_margin);
    exp->add_option("--lambda", x_lambda);
    exp->add_option("--lr", x_lr);
    exp->add_option("--epochs", x_epochs);
    exp->add_option("--out", x_out);

    try {
        app.parse(argc, argv);
        if (*synth)
            return run_synth(synth_out, synth_labels, synth_pairs, clusters, dim, count, spread,
                             synth_seed, n_pos, n_neg);
        if (*train_cmd) return run_train(train_config, train_out);
        if (*encode) return run_encode(enc_ckpt, enc_features, enc_out, theta);
        if (*index_cmd)
            return run_index(idx_codes, idx_out, idx_alphabet, idx_scan_cost, idx_calibrate);
        if (*query_cmd) return run_query(q_index, q_code, q_codes, q_id, q_r, q_strategy);
        if (*eval_cmd)
            return run_eval(e_index, e_queries, e_qlabels, e_dblabels, e_gtpairs, e_radii, e_map_r,
                            e_mp_k, e_curve_cap, e_out);
        if (*bench) return run_bench(b_index, b_queries, b_radii, b_nq, b_out);
        if (*exp)
            return run_experiment(x_clusters, x_classes, x_dim, x_count, x_spread, x_seed,
                                  Eigen::Index(x_m_small), Eigen::Index(x_m_large), x_alpha,
                                  x_margin, x_lambda, x_lr, x_epochs, x_steepness, x_out);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
