#include "ternhash/io.hpp"

#include "binio.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ternhash {

using nlohmann::json;

namespace {

// stable shortest round-trip text for doubles
std::string fmt_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace

void save_matrix(const Mat& data, const std::string& path) {
    auto os = binio::open_out(path);
    binio::write_magic(os, "THMX");
    binio::write_u32(os, 1);
    binio::write_u64(os, uint64_t(data.rows()));
    binio::write_u64(os, uint64_t(data.cols()));
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        for (Eigen::Index j = 0; j < data.cols(); ++j)
            binio::write_f32(os, float(data(i, j)));
    if (!os) throw DataError("save_matrix: write failed: " + path);
}

Mat load_matrix(const std::string& path) {
    auto is = binio::open_in(path);
    binio::expect_magic(is, "THMX", path);
    uint32_t version = binio::read_u32(is, "version");
    if (version != 1) throw DataError(path + ": unsupported matrix version");
    uint64_t rows = binio::read_u64(is, "rows");
    uint64_t cols = binio::read_u64(is, "cols");
    if (rows == 0 || cols == 0) throw DataError(path + ": empty matrix");
    Mat data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        for (Eigen::Index j = 0; j < data.cols(); ++j)
            data(i, j) = double(binio::read_f32(is, "matrix data"));
    return data;
}

Mat load_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open for reading: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError(path + ": bad numeric value '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");
    Mat data(Eigen::Index(rows.size()), Eigen::Index(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            data(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    return data;
}

void save_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    for (int l : labels) os << l << "\n";
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open for reading: " + path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            labels.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw DataError(path + ": bad label '" + line + "'");
        }
    }
    return labels;
}

void save_pairs(const std::vector<PairSample>& pairs, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    for (const auto& p : pairs) os << p.a << " " << p.b << " " << int(p.label) << "\n";
}

std::vector<PairSample> load_pairs(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open for reading: " + path);
    std::vector<PairSample> pairs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        uint32_t a, b;
        int s;
        if (!(ss >> a >> b >> s) || (s != 0 && s != 1))
            throw DataError(path + ": bad pair at line " + std::to_string(lineno));
        pairs.push_back({a, b, uint8_t(s)});
    }
    return pairs;
}

void save_codes(const std::vector<TernaryCode>& codes, const std::string& path) {
    check_arg(!codes.empty(), "save_codes: empty code list");
    auto os = binio::open_out(path);
    binio::write_magic(os, "THCD");
    binio::write_u32(os, 1);
    binio::write_u32(os, uint32_t(codes[0].size()));
    binio::write_u64(os, codes.size());
    for (const auto& c : codes) {
        check_dim(c.size() == codes[0].size(), "save_codes: code length mismatch");
        auto bytes = c.pack();
        binio::write_bytes(os, bytes.data(), bytes.size());
    }
    if (!os) throw DataError("save_codes: write failed: " + path);
}

std::vector<TernaryCode> load_codes(const std::string& path) {
    auto is = binio::open_in(path);
    binio::expect_magic(is, "THCD", path);
    uint32_t version = binio::read_u32(is, "version");
    if (version != 1) throw DataError(path + ": unsupported codes version");
    uint32_t m = binio::read_u32(is, "code_len");
    uint64_t count = binio::read_u64(is, "count");
    std::vector<TernaryCode> codes;
    codes.reserve(count);
    std::vector<uint8_t> bytes((m + 3) / 4);
    for (uint64_t i = 0; i < count; ++i) {
        binio::read_bytes(is, bytes.data(), bytes.size(), "code data");
        codes.push_back(TernaryCode::unpack(bytes, m));
    }
    return codes;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Ista: return "ista";
        case Method::NnHash: return "nnhash";
        case Method::DiffHash: return "diffhash";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "ista") return Method::Ista;
    if (name == "nnhash") return Method::NnHash;
    if (name == "diffhash") return Method::DiffHash;
    return std::nullopt;
}

Eigen::Index Checkpoint::code_len() const {
    return method == Method::Ista ? encoder->code_len() : linear->code_len();
}

Eigen::Index Checkpoint::input_dim() const {
    return method == Method::Ista ? encoder->input_dim() : linear->input_dim();
}

Vec Checkpoint::encode(const Vec& x) const {
    if (method == Method::Ista) return forward(*encoder, x).output;
    return linear_forward(*linear, x, steepness);
}

Mat Checkpoint::encode_batch(const Mat& data) const {
    if (method == Method::Ista) return ternhash::encode_batch(*encoder, data);
    return linear_encode_batch(*linear, data, steepness);
}

namespace {

void write_mat(std::ostream& os, const Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) binio::write_f64(os, m(i, j));
}

Mat read_mat(std::istream& is, Eigen::Index rows, Eigen::Index cols, const char* what) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = binio::read_f64(is, what);
    return m;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const CheckpointMeta& meta, const std::string& path) {
    auto os = binio::open_out(path);
    binio::write_magic(os, "THCK");
    binio::write_u32(os, 1);
    binio::write_u32(os, uint32_t(ckpt.method));
    uint32_t n = uint32_t(ckpt.input_dim());
    uint32_t m = uint32_t(ckpt.code_len());
    binio::write_u32(os, n);
    binio::write_u32(os, m);
    if (ckpt.method == Method::Ista) {
        const EncoderParams& p = *ckpt.encoder;
        binio::write_u32(os, uint32_t(p.iters));
        binio::write_f64(os, p.steepness);
        write_mat(os, p.proj);
        write_mat(os, p.inhib);
        write_mat(os, p.thresholds);
    } else {
        binio::write_u32(os, 0);  // iters unused
        binio::write_f64(os, ckpt.steepness);
        write_mat(os, ckpt.linear->proj);
        write_mat(os, ckpt.linear->offset);
    }
    if (!os) throw DataError("save_checkpoint: write failed: " + path);

    json side;
    side["method"] = method_name(ckpt.method);
    side["seed"] = meta.seed;
    side["config_hash"] = meta.config_hash;
    std::ofstream js(path + ".json");
    if (!js) throw DataError("cannot open for writing: " + path + ".json");
    js << side.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    auto is = binio::open_in(path);
    binio::expect_magic(is, "THCK", path);
    uint32_t version = binio::read_u32(is, "version");
    if (version != 1) throw DataError(path + ": unsupported checkpoint version");
    uint32_t method_tag = binio::read_u32(is, "method");
    if (method_tag > 2) throw DataError(path + ": unknown method tag");
    uint32_t n = binio::read_u32(is, "input_dim");
    uint32_t m = binio::read_u32(is, "code_len");
    uint32_t iters = binio::read_u32(is, "iters");
    double steepness = binio::read_f64(is, "steepness");

    Checkpoint ckpt;
    ckpt.method = Method(method_tag);
    ckpt.steepness = steepness;
    if (ckpt.method == Method::Ista) {
        EncoderParams p;
        p.proj = read_mat(is, m, n, "proj");
        p.inhib = read_mat(is, m, m, "inhib");
        p.thresholds = read_mat(is, m, 1, "thresholds").col(0);
        p.steepness = steepness;
        p.iters = int(iters);
        p.validate();
        ckpt.encoder = std::move(p);
    } else {
        LinearHashParams p;
        p.proj = read_mat(is, m, n, "proj");
        p.offset = read_mat(is, m, 1, "offset").col(0);
        ckpt.linear = std::move(p);
    }
    return ckpt;
}

CheckpointMeta load_checkpoint_meta(const std::string& path) {
    std::ifstream js(path + ".json");
    if (!js) throw DataError("cannot open for reading: " + path + ".json");
    json side = json::parse(js, nullptr, false);
    if (side.is_discarded()) throw DataError(path + ".json: invalid JSON");
    CheckpointMeta meta;
    meta.seed = side.value("seed", uint64_t(0));
    meta.config_hash = side.value("config_hash", "");
    return meta;
}

void save_train_log(const std::vector<EpochStats>& log, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "epoch\tmean_loss\tmean_sparsity\tmean_pos_d1\tmean_neg_d1\tlr\n";
    for (const auto& e : log) {
        os << e.epoch << "\t" << fmt_double(e.mean_loss) << "\t" << fmt_double(e.mean_sparsity)
           << "\t" << fmt_double(e.mean_pos_dist) << "\t" << fmt_double(e.mean_neg_dist) << "\t"
           << fmt_double(e.learning_rate) << "\n";
    }
}

void save_metric_report_tsv(const MetricReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "radius\tprecision\trecall\tf1\tretrieved\trelevant\trelevant_retrieved\tskipped\n";
    for (const auto& r : report.per_radius) {
        os << r.radius << "\t" << fmt_double(r.precision) << "\t" << fmt_double(r.recall) << "\t"
           << fmt_double(r.f1) << "\t" << r.retrieved << "\t" << r.relevant << "\t"
           << r.relevant_retrieved << "\t" << r.queries_skipped << "\n";
    }
    os << "# mAP@" << report.ranking.rank_cap << "\t" << fmt_double(report.ranking.mean_ap)
       << "\tunnormalized\t" << fmt_double(report.ranking.mean_ap_unnormalized) << "\n";
    os << "# MP@" << report.ranking.top_k << "\t" << fmt_double(report.ranking.mean_precision)
       << "\n";
}

void save_metric_report_json(const MetricReport& report, const std::string& path) {
    json j;
    j["per_radius"] = json::array();
    for (const auto& r : report.per_radius) {
        j["per_radius"].push_back({{"radius", r.radius},
                                   {"precision", r.precision},
                                   {"recall", r.recall},
                                   {"f1", r.f1},
                                   {"retrieved", r.retrieved},
                                   {"relevant", r.relevant},
                                   {"relevant_retrieved", r.relevant_retrieved},
                                   {"queries_skipped", r.queries_skipped}});
    }
    j["map"] = {{"R", report.ranking.rank_cap},
                {"mean_ap", report.ranking.mean_ap},
                {"mean_ap_unnormalized", report.ranking.mean_ap_unnormalized}};
    j["mp"] = {{"K", report.ranking.top_k}, {"mean_precision", report.ranking.mean_precision}};
    j["queries_evaluated"] = report.ranking.queries_evaluated;
    j["queries_skipped"] = report.ranking.queries_skipped;
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

void save_pr_curve(const std::vector<PrPoint>& points, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "# recall\tprecision\n";
    for (const auto& p : points) os << fmt_double(p.recall) << "\t" << fmt_double(p.precision)
                                    << "\n";
}

void save_experiment_report(const ExperimentReport& report, const std::string& tsv_path,
                            const std::string& json_path) {
    std::ofstream os(tsv_path);
    if (!os) throw DataError("cannot open for writing: " + tsv_path);
    os << "method\tm\tsparsity\tunique_codes\tavg_neighbors_r0";
    std::vector<unsigned> radii;
    if (!report.entries.empty())
        for (auto& [r, v] : report.entries.front().recall) radii.push_back(r);
    for (unsigned r : radii) os << "\trecall_r" << r << "\tprecision_r" << r;
    os << "\n";
    for (const auto& e : report.entries) {
        os << e.method << "\t" << e.code_len << "\t" << fmt_double(e.mean_sparsity) << "\t"
           << e.unique_codes << "\t" << fmt_double(e.avg_neighbors_r0);
        for (unsigned r : radii)
            os << "\t" << fmt_double(e.recall.at(r)) << "\t" << fmt_double(e.precision.at(r));
        os << "\n";
    }

    json j = json::array();
    for (const auto& e : report.entries) {
        json entry;
        entry["method"] = e.method;
        entry["m"] = e.code_len;
        entry["sparsity"] = e.mean_sparsity;
        entry["unique_codes"] = e.unique_codes;
        entry["avg_neighbors_r0"] = e.avg_neighbors_r0;
        for (auto& [r, v] : e.recall) entry["recall"][std::to_string(r)] = v;
        for (auto& [r, v] : e.precision) entry["precision"][std::to_string(r)] = v;
        j.push_back(entry);
    }
    std::ofstream js(json_path);
    if (!js) throw DataError("cannot open for writing: " + json_path);
    js << j.dump(2) << "\n";
}

}  // namespace ternhash
