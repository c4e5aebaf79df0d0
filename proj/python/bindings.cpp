// Python bindings for the core operations: data synthesis, training,
// encoding, indexing, querying and evaluation.

#include "ternhash/eval.hpp"
#include "ternhash/io.hpp"
#include "ternhash/multimodal.hpp"
#include "ternhash/retrieval.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ternhash;

namespace {

TernaryCode code_from_array(py::array_t<int8_t, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 1) throw DimensionError("code must be a 1-d int8 array");
    std::vector<int8_t> s(arr.data(), arr.data() + arr.size());
    return TernaryCode(std::move(s));
}

py::array_t<int8_t> code_to_array(const TernaryCode& c) {
    py::array_t<int8_t> out(py::ssize_t(c.size()));
    std::copy(c.symbols.begin(), c.symbols.end(), out.mutable_data());
    return out;
}

std::vector<TernaryCode> codes_from_matrix(
    py::array_t<int8_t, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2) throw DimensionError("codes must be a 2-d int8 array");
    std::vector<TernaryCode> codes;
    codes.reserve(size_t(arr.shape(0)));
    for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
        std::vector<int8_t> s(arr.data(i, 0), arr.data(i, 0) + arr.shape(1));
        codes.push_back(TernaryCode(std::move(s)));
    }
    return codes;
}

py::array_t<int8_t> quantize_batch(const Mat& continuous, double threshold) {
    py::array_t<int8_t> out({continuous.rows(), continuous.cols()});
    for (Eigen::Index i = 0; i < continuous.rows(); ++i) {
        TernaryCode c = quantize(continuous.row(i).transpose(), threshold);
        std::copy(c.symbols.begin(), c.symbols.end(), out.mutable_data(i, 0));
    }
    return out;
}

LossConfig loss_from_kwargs(double alpha, double lam, double margin) {
    LossConfig cfg;
    cfg.sparsity_weight = alpha;
    cfg.negative_weight = lam;
    cfg.margin = margin;
    return cfg;
}

SgdConfig sgd_from_kwargs(double lr, double decay, double momentum, int epochs, int batch,
                          uint64_t seed, bool shuffle, int workers) {
    SgdConfig cfg;
    cfg.learning_rate = lr;
    cfg.decay = decay;
    cfg.momentum = momentum;
    cfg.max_epochs = epochs;
    cfg.batch_size = batch;
    cfg.seed = seed;
    cfg.shuffle = shuffle;
    cfg.workers = workers;
    return cfg;
}

std::vector<PairSample> pairs_from_array(
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 3)
        throw DimensionError("pairs must be an (n, 3) integer array of (a, b, label)");
    std::vector<PairSample> pairs;
    pairs.reserve(size_t(arr.shape(0)));
    for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
        pairs.push_back({uint32_t(*arr.data(i, 0)), uint32_t(*arr.data(i, 1)),
                         uint8_t(*arr.data(i, 2))});
    }
    return pairs;
}

py::dict log_to_dict(const std::vector<EpochStats>& log) {
    py::list epochs, loss, sparsity, pos, neg, lr;
    for (const auto& e : log) {
        epochs.append(e.epoch);
        loss.append(e.mean_loss);
        sparsity.append(e.mean_sparsity);
        pos.append(e.mean_pos_dist);
        neg.append(e.mean_neg_dist);
        lr.append(e.learning_rate);
    }
    py::dict d;
    d["epoch"] = epochs;
    d["mean_loss"] = loss;
    d["mean_sparsity"] = sparsity;
    d["mean_pos_d1"] = pos;
    d["mean_neg_d1"] = neg;
    d["lr"] = lr;
    return d;
}

}  // namespace

PYBIND11_MODULE(_ternhash, m) {
    m.doc() = "learned sparse ternary hashing for similarity search";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    // ---- codes ----
    m.def("hamming_distance",
          [](py::array_t<int8_t> a, py::array_t<int8_t> b) {
              return hamming_distance(code_from_array(a), code_from_array(b));
          },
          py::arg("a"), py::arg("b"));
    m.def("quantize",
          [](const Mat& continuous, double threshold) {
              return quantize_batch(continuous, threshold);
          },
          py::arg("continuous"), py::arg("threshold") = 0.0,
          "sign with zero preserved, rows quantized independently");
    m.def("sparsity",
          [](py::array_t<int8_t> code) { return sparsity(code_from_array(code)); });
    m.def("code_stats",
          [](py::array_t<int8_t> codes, const std::vector<unsigned>& radii) {
              CodeStats stats = code_stats(codes_from_matrix(codes), radii);
              py::dict d;
              d["unique_codes"] = stats.unique_code_count;
              py::dict by_r;
              for (auto& [r, v] : stats.avg_neighbors_at_r) by_r[py::int_(r)] = v;
              d["avg_neighbors"] = by_r;
              return d;
          },
          py::arg("codes"), py::arg("radii"));

    // ---- synthetic data & pairs ----
    m.def("make_clusters",
          [](size_t clusters, size_t dim, size_t count, double spread, uint64_t seed) {
              SynthData d = make_clusters({clusters, dim, count, spread, seed});
              return py::make_tuple(d.points, d.labels);
          },
          py::arg("clusters") = 10, py::arg("dim") = 32, py::arg("count") = 2000,
          py::arg("spread") = 0.5, py::arg("seed") = 1);
    m.def("make_pairs",
          [](const std::vector<int>& labels, size_t n_positive, size_t n_negative,
             uint64_t seed) {
              auto pairs = make_pairs_from_labels(labels, n_positive, n_negative, seed);
              py::array_t<int64_t> out({py::ssize_t(pairs.size()), py::ssize_t(3)});
              for (size_t i = 0; i < pairs.size(); ++i) {
                  *out.mutable_data(py::ssize_t(i), 0) = pairs[i].a;
                  *out.mutable_data(py::ssize_t(i), 1) = pairs[i].b;
                  *out.mutable_data(py::ssize_t(i), 2) = pairs[i].label;
              }
              return out;
          },
          py::arg("labels"), py::arg("n_positive"), py::arg("n_negative"), py::arg("seed") = 1);

    // ---- encoder ----
    py::class_<EncoderParams>(m, "EncoderParams")
        .def_readonly("proj", &EncoderParams::proj)
        .def_readonly("inhib", &EncoderParams::inhib)
        .def_readonly("thresholds", &EncoderParams::thresholds)
        .def_readonly("steepness", &EncoderParams::steepness)
        .def_readonly("iters", &EncoderParams::iters)
        .def("encode", [](const EncoderParams& p, const Mat& data) {
            return encode_batch(p, data);
        });

    m.def("init_params",
          [](const Mat& training, Eigen::Index m_len, int iters, double steepness,
             uint64_t seed) { return init_params(training, m_len, iters, steepness, seed); },
          py::arg("training"), py::arg("m"), py::arg("iters") = 1, py::arg("steepness") = 3.0,
          py::arg("seed") = 1);

    m.def("train",
          [](const Mat& data, py::array_t<int64_t> pairs, const EncoderParams& init,
             double alpha, double lam, double margin, double lr, double decay, double momentum,
             int epochs, int batch, uint64_t seed, bool shuffle, int workers) {
              TrainResult res =
                  train(data, pairs_from_array(pairs), loss_from_kwargs(alpha, lam, margin),
                        sgd_from_kwargs(lr, decay, momentum, epochs, batch, seed, shuffle,
                                        workers),
                        init);
              return py::make_tuple(res.params, log_to_dict(res.log));
          },
          py::arg("data"), py::arg("pairs"), py::arg("init"), py::arg("alpha") = 0.01,
          py::arg("lam") = 0.1, py::arg("margin") = 8.0, py::arg("lr") = 0.05,
          py::arg("decay") = 0.98, py::arg("momentum") = 0.9, py::arg("epochs") = 250,
          py::arg("batch") = 32, py::arg("seed") = 1, py::arg("shuffle") = true,
          py::arg("workers") = 1);

    m.def("pair_loss",
          [](const Vec& y, const Vec& y2, int label, double alpha, double lam, double margin) {
              return pair_loss(y, y2, label, loss_from_kwargs(alpha, lam, margin));
          },
          py::arg("y"), py::arg("y2"), py::arg("label"), py::arg("alpha") = 0.01,
          py::arg("lam") = 0.1, py::arg("margin") = 8.0);

    // ---- baselines ----
    py::class_<LinearHashParams>(m, "LinearHashParams")
        .def_readonly("proj", &LinearHashParams::proj)
        .def_readonly("offset", &LinearHashParams::offset)
        .def("encode", [](const LinearHashParams& p, const Mat& data, double steepness) {
            return linear_encode_batch(p, data, steepness);
        }, py::arg("data"), py::arg("steepness") = 3.0);

    m.def("diffhash_fit",
          [](const Mat& data, py::array_t<int64_t> pairs, Eigen::Index m_len) {
              DiffHashResult res = diffhash_fit(data, pairs_from_array(pairs), m_len);
              return py::make_tuple(res.params, res.spectrum, res.warnings);
          },
          py::arg("data"), py::arg("pairs"), py::arg("m"));

    m.def("nnhash_train",
          [](const Mat& data, py::array_t<int64_t> pairs, Eigen::Index m_len, double margin,
             double steepness, double lr, int epochs, uint64_t seed) {
              NnHashConfig cfg;
              cfg.m = m_len;
              cfg.margin = margin;
              cfg.steepness = steepness;
              cfg.sgd.learning_rate = lr;
              cfg.sgd.max_epochs = epochs;
              cfg.sgd.seed = seed;
              NnHashTrainResult res = nnhash_train(data, pairs_from_array(pairs), cfg);
              return py::make_tuple(res.params, log_to_dict(res.log));
          },
          py::arg("data"), py::arg("pairs"), py::arg("m"), py::arg("margin") = 4.0,
          py::arg("steepness") = 3.0, py::arg("lr") = 0.05, py::arg("epochs") = 100,
          py::arg("seed") = 1);

    // ---- retrieval ----
    py::enum_<Strategy>(m, "Strategy")
        .value("AUTO", Strategy::Auto)
        .value("EXACT", Strategy::LutExact)
        .value("PROBE", Strategy::LutProbe)
        .value("SCAN", Strategy::BruteForce);

    py::class_<CodeIndex>(m, "Index")
        .def(py::init([](py::array_t<int8_t> codes, const std::string& alphabet,
                         double scan_cost) {
                 Alphabet a = alphabet == "binary" ? Alphabet::Binary : Alphabet::Ternary;
                 return build_index(codes_from_matrix(codes), a, scan_cost);
             }),
             py::arg("codes"), py::arg("alphabet") = "ternary",
             py::arg("scan_cost") = kDefaultScanCost)
        .def("__len__", &CodeIndex::size)
        .def_property_readonly("code_len", &CodeIndex::code_len)
        .def_property_readonly("unique_codes", &CodeIndex::bucket_count)
        .def("query",
             [](const CodeIndex& index, py::array_t<int8_t> q, unsigned r, Strategy strategy) {
                 return query(index, code_from_array(q), r, strategy);
             },
             py::arg("code"), py::arg("r") = 0, py::arg("strategy") = Strategy::Auto)
        .def("rank",
             [](const CodeIndex& index, py::array_t<int8_t> q, size_t limit) {
                 return rank_all(index, code_from_array(q), limit);
             },
             py::arg("code"), py::arg("limit"))
        .def("plan",
             [](const CodeIndex& index, unsigned r) {
                 QueryPlan plan = plan_query(index, r);
                 py::dict d;
                 d["strategy"] = strategy_name(plan.strategy);
                 d["radius"] = plan.radius;
                 d["est_probe_cost"] = plan.est_probe_cost;
                 d["est_scan_cost"] = plan.est_scan_cost;
                 return d;
             },
             py::arg("r"))
        .def("code", [](const CodeIndex& index, size_t id) { return code_to_array(index.code(id)); })
        .def("save", [](const CodeIndex& index, const std::string& path) {
            save_index(index, path);
        });
    m.def("load_index", &load_index, py::arg("path"));
    m.def("probe_cost",
          [](size_t m_len, unsigned r, const std::string& alphabet) {
              return probe_cost(m_len, r,
                                alphabet == "binary" ? Alphabet::Binary : Alphabet::Ternary);
          },
          py::arg("m"), py::arg("r"), py::arg("alphabet") = "ternary");

    // ---- evaluation ----
    m.def("evaluate",
          [](const CodeIndex& index, py::array_t<int8_t> queries,
             const std::vector<int>& query_labels, const std::vector<int>& db_labels,
             const std::vector<unsigned>& radii, unsigned R, unsigned K) {
              auto query_codes = codes_from_matrix(queries);
              GroundTruth gt = GroundTruth::from_labels(query_labels, db_labels);
              py::dict out;
              py::list per_radius;
              for (unsigned r : radii) {
                  std::vector<std::vector<uint32_t>> results(query_codes.size());
                  for (size_t q = 0; q < query_codes.size(); ++q)
                      results[q] = query(index, query_codes[q], r);
                  RadiusMetrics m_r = pr_at_radius(results, gt, r);
                  py::dict d;
                  d["radius"] = m_r.radius;
                  d["precision"] = m_r.precision;
                  d["recall"] = m_r.recall;
                  d["f1"] = m_r.f1;
                  per_radius.append(d);
              }
              out["per_radius"] = per_radius;
              std::vector<std::vector<uint32_t>> rankings(query_codes.size());
              for (size_t q = 0; q < query_codes.size(); ++q)
                  rankings[q] = rank_all(index, query_codes[q],
                                         std::min<size_t>(index.size(), std::max(R, K)));
              out["map"] = mean_average_precision(rankings, gt, R).mean_ap;
              out["mp"] = mean_precision_at_k(rankings, gt, K).mean_precision;
              return out;
          },
          py::arg("index"), py::arg("queries"), py::arg("query_labels"), py::arg("db_labels"),
          py::arg("radii"), py::arg("R") = 10, py::arg("K") = 10);

    // ---- checkpoints ----
    m.def("save_encoder",
          [](const EncoderParams& p, const std::string& path, uint64_t seed) {
              Checkpoint ckpt;
              ckpt.method = Method::Ista;
              ckpt.encoder = p;
              ckpt.steepness = p.steepness;
              save_checkpoint(ckpt, {seed, ""}, path);
          },
          py::arg("params"), py::arg("path"), py::arg("seed") = 0);
    m.def("load_encoder", [](const std::string& path) {
        Checkpoint ckpt = load_checkpoint(path);
        if (ckpt.method != Method::Ista) throw DataError("checkpoint is not an encoder");
        return *ckpt.encoder;
    });
}
