#include "ternhash/retrieval.hpp"

#include "binio.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>
#include <numeric>

namespace ternhash {

namespace {

constexpr uint64_t kLowBits = 0x5555555555555555ULL;  // every even bit
constexpr size_t kSymbolsPerWord = 32;

inline uint64_t hash_words(const uint64_t* words, size_t n) {
    return fnv1a(words, n * sizeof(uint64_t));
}

inline unsigned get_field(const uint64_t* words, size_t pos) {
    return unsigned(words[pos / kSymbolsPerWord] >> (2 * (pos % kSymbolsPerWord))) & 3u;
}

inline void set_field(uint64_t* words, size_t pos, unsigned value) {
    uint64_t shift = 2 * (pos % kSymbolsPerWord);
    uint64_t& w = words[pos / kSymbolsPerWord];
    w = (w & ~(3ULL << shift)) | (uint64_t(value) << shift);
}

inline bool words_equal(const uint64_t* a, const uint64_t* b, size_t n) {
    return std::memcmp(a, b, n * sizeof(uint64_t)) == 0;
}

bool words_less(const uint64_t* a, const uint64_t* b, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

uint64_t saturating_mul(uint64_t a, uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > UINT64_MAX / b) return UINT64_MAX;
    return a * b;
}

uint64_t saturating_add(uint64_t a, uint64_t b) {
    return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

}  // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Auto: return "auto";
        case Strategy::LutExact: return "exact";
        case Strategy::LutProbe: return "probe";
        case Strategy::BruteForce: return "scan";
    }
    return "?";
}

std::vector<uint64_t> pack_words(const TernaryCode& code) {
    std::vector<uint64_t> words((code.size() + kSymbolsPerWord - 1) / kSymbolsPerWord, 0);
    for (size_t j = 0; j < code.size(); ++j) {
        unsigned field = code.symbols[j] == 0 ? 0u : (code.symbols[j] > 0 ? 1u : 2u);
        words[j / kSymbolsPerWord] |= uint64_t(field) << (2 * (j % kSymbolsPerWord));
    }
    return words;
}

TernaryCode unpack_words(const uint64_t* words, size_t m) {
    std::vector<int8_t> s(m);
    for (size_t j = 0; j < m; ++j) {
        unsigned f = get_field(words, j);
        if (f == 3u) throw DataError("unpack_words: invalid symbol field");
        s[j] = f == 0 ? 0 : (f == 1 ? 1 : -1);
    }
    return TernaryCode(std::move(s));
}

unsigned packed_distance(const uint64_t* a, const uint64_t* b, size_t n_words) {
    unsigned d = 0;
    for (size_t i = 0; i < n_words; ++i) {
        uint64_t x = a[i] ^ b[i];
        d += unsigned(std::popcount((x | (x >> 1)) & kLowBits));
    }
    return d;
}

uint64_t probe_cost(size_t m, unsigned r, Alphabet alphabet) {
    uint64_t total = 0;
    uint64_t level = 1;  // C(m, j) * alts^j
    unsigned alts = alphabet == Alphabet::Ternary ? 2 : 1;
    for (unsigned j = 0;; ++j) {
        total = saturating_add(total, level);
        if (j == r || total == UINT64_MAX) break;
        // C(m, j+1) = C(m, j) * (m - j) / (j + 1); multiply alternatives in
        level = saturating_mul(level, m - j);
        level /= (j + 1);
        level = saturating_mul(level, alts);
    }
    return total;
}

TernaryCode CodeIndex::code(size_t id) const { return unpack_words(code_words(id), code_len_); }

std::pair<uint64_t, uint64_t> CodeIndex::find_bucket(const uint64_t* words) const {
    auto it = lut_.find(hash_words(words, words_per_code_));
    if (it == lut_.end()) return {0, 0};
    for (uint32_t bucket : it->second) {
        if (words_equal(bucket_words_.data() + size_t(bucket) * words_per_code_, words,
                        words_per_code_)) {
            return {bucket_offsets_[bucket], bucket_offsets_[bucket + 1] - bucket_offsets_[bucket]};
        }
    }
    return {0, 0};
}

void CodeIndex::rebuild_lut() {
    lut_.clear();
    size_t buckets = bucket_count();
    lut_.reserve(buckets);
    for (size_t b = 0; b < buckets; ++b) {
        uint64_t h = hash_words(bucket_words_.data() + b * words_per_code_, words_per_code_);
        lut_[h].push_back(uint32_t(b));
    }
}

CodeIndex build_index(const std::vector<TernaryCode>& codes, Alphabet alphabet,
                      double scan_cost) {
    check_arg(!codes.empty(), "build_index: empty code list");
    const size_t m = codes[0].size();
    check_arg(m >= 1, "build_index: zero-length codes");
    for (const auto& c : codes) {
        check_dim(c.size() == m, "build_index: code length mismatch");
        if (alphabet == Alphabet::Binary) {
            for (int8_t v : c.symbols)
                if (v == 0) throw ArgumentError("build_index: zero symbol in binary mode");
        }
    }

    CodeIndex index;
    index.n_items_ = codes.size();
    index.code_len_ = m;
    index.words_per_code_ = (m + kSymbolsPerWord - 1) / kSymbolsPerWord;
    index.alphabet_ = alphabet;
    index.scan_cost_ = scan_cost;

    index.item_words_.resize(codes.size() * index.words_per_code_);
    for (size_t i = 0; i < codes.size(); ++i) {
        auto w = pack_words(codes[i]);
        std::copy(w.begin(), w.end(), index.item_words_.begin() + i * index.words_per_code_);
    }

    // group ids by code, buckets in lexicographic word order
    std::vector<uint32_t> order(codes.size());
    std::iota(order.begin(), order.end(), 0u);
    const uint64_t* base = index.item_words_.data();
    const size_t wpc = index.words_per_code_;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        const uint64_t* wa = base + size_t(a) * wpc;
        const uint64_t* wb = base + size_t(b) * wpc;
        if (words_equal(wa, wb, wpc)) return a < b;
        return words_less(wa, wb, wpc);
    });

    index.bucket_ids_ = order;
    index.bucket_offsets_.push_back(0);
    for (size_t i = 0; i < order.size(); ++i) {
        const uint64_t* w = base + size_t(order[i]) * wpc;
        if (i == 0 || !words_equal(w, base + size_t(order[i - 1]) * wpc, wpc)) {
            if (i != 0) index.bucket_offsets_.push_back(i);
            index.bucket_words_.insert(index.bucket_words_.end(), w, w + wpc);
        }
    }
    index.bucket_offsets_.push_back(order.size());
    index.rebuild_lut();
    return index;
}

namespace {

// Enumerate every code at distance exactly `remaining` from the current
// words (positions >= start changed to alternative symbols), feeding each
// completed perturbation to the lookup.
template <typename Fn>
void probe_positions(uint64_t* words, size_t m, size_t start, unsigned remaining,
                     Alphabet alphabet, Fn&& lookup) {
    if (remaining == 0) {
        lookup(words);
        return;
    }
    for (size_t pos = start; pos + remaining <= m; ++pos) {
        unsigned orig = get_field(words, pos);
        if (alphabet == Alphabet::Binary) {
            set_field(words, pos, orig == 1u ? 2u : 1u);
            probe_positions(words, m, pos + 1, remaining - 1, alphabet, lookup);
        } else {
            for (unsigned alt = 0; alt < 3; ++alt) {
                if (alt == orig) continue;
                set_field(words, pos, alt);
                probe_positions(words, m, pos + 1, remaining - 1, alphabet, lookup);
            }
        }
        set_field(words, pos, orig);
    }
}

}  // namespace

QueryPlan plan_query(const CodeIndex& index, unsigned r) {
    QueryPlan plan;
    plan.radius = r;
    plan.est_probe_cost = double(probe_cost(index.code_len(), r, index.alphabet()));
    plan.est_scan_cost = double(index.size()) * index.scan_cost();
    if (r == 0) {
        plan.strategy = Strategy::LutExact;
    } else {
        plan.strategy =
            plan.est_probe_cost < plan.est_scan_cost ? Strategy::LutProbe : Strategy::BruteForce;
    }
    return plan;
}

std::vector<uint32_t> query(const CodeIndex& index, const TernaryCode& q, unsigned r,
                            Strategy strategy, QueryStats* stats) {
    check_dim(q.size() == index.code_len(), "query: code length mismatch");
    check_arg(r <= index.code_len(), "query: radius exceeds code length");
    if (index.alphabet() == Alphabet::Binary) {
        for (int8_t v : q.symbols)
            if (v == 0) throw ArgumentError("query: zero symbol in binary mode");
    }

    if (strategy == Strategy::Auto) strategy = plan_query(index, r).strategy;
    if (strategy == Strategy::LutExact && r != 0)
        throw ArgumentError("query: exact lookup requires radius 0");

    QueryStats local;
    local.used = strategy;
    std::vector<uint32_t> out;
    std::vector<uint64_t> qwords = pack_words(q);

    switch (strategy) {
        case Strategy::LutExact: {
            auto [off, len] = index.find_bucket(qwords.data());
            local.probes = 1;
            out.assign(index.ids().begin() + ptrdiff_t(off),
                       index.ids().begin() + ptrdiff_t(off + len));
            break;
        }
        case Strategy::LutProbe: {
            auto lookup = [&](const uint64_t* words) {
                ++local.probes;
                auto [off, len] = index.find_bucket(words);
                out.insert(out.end(), index.ids().begin() + ptrdiff_t(off),
                           index.ids().begin() + ptrdiff_t(off + len));
            };
            // distinct perturbations land in distinct buckets, so the union
            // is a plain concatenation
            for (unsigned j = 0; j <= r; ++j)
                probe_positions(qwords.data(), index.code_len(), 0, j, index.alphabet(), lookup);
            break;
        }
        case Strategy::BruteForce: {
            const size_t wpc = index.words_per_code();
            for (size_t id = 0; id < index.size(); ++id) {
                if (packed_distance(index.code_words(id), qwords.data(), wpc) <= r)
                    out.push_back(uint32_t(id));
            }
            local.scanned = index.size();
            break;
        }
        case Strategy::Auto:
            throw InternalError("query: unresolved strategy");
    }

    std::sort(out.begin(), out.end());
    if (stats) *stats = local;
    return out;
}

std::vector<uint32_t> rank_all(const CodeIndex& index, const TernaryCode& q, size_t limit) {
    check_dim(q.size() == index.code_len(), "rank_all: code length mismatch");
    check_arg(limit <= index.size(), "rank_all: limit exceeds index size");
    std::vector<uint64_t> qwords = pack_words(q);
    std::vector<std::pair<unsigned, uint32_t>> keyed(index.size());
    for (size_t id = 0; id < index.size(); ++id)
        keyed[id] = {packed_distance(index.code_words(id), qwords.data(), index.words_per_code()),
                     uint32_t(id)};
    std::sort(keyed.begin(), keyed.end());
    std::vector<uint32_t> out(limit);
    for (size_t i = 0; i < limit; ++i) out[i] = keyed[i].second;
    return out;
}

void save_index(const CodeIndex& index, const std::string& path) {
    auto os = binio::open_out(path);
    binio::write_magic(os, "THIX");
    binio::write_u32(os, 1);  // version
    binio::write_u32(os, uint32_t(index.code_len_));
    binio::write_u32(os, uint32_t(index.alphabet_));
    binio::write_u64(os, index.n_items_);
    binio::write_f64(os, index.scan_cost_);
    for (uint64_t w : index.item_words_) binio::write_u64(os, w);
    binio::write_u64(os, index.bucket_offsets_.size());
    for (uint64_t v : index.bucket_offsets_) binio::write_u64(os, v);
    for (uint32_t v : index.bucket_ids_) binio::write_u32(os, v);
    for (uint64_t w : index.bucket_words_) binio::write_u64(os, w);
    if (!os) throw DataError("save_index: write failed: " + path);
}

CodeIndex load_index(const std::string& path) {
    auto is = binio::open_in(path);
    binio::expect_magic(is, "THIX", path);
    uint32_t version = binio::read_u32(is, "version");
    if (version != 1) throw DataError(path + ": unsupported index version");

    CodeIndex index;
    index.code_len_ = binio::read_u32(is, "code_len");
    uint32_t alpha = binio::read_u32(is, "alphabet");
    if (alpha > 1) throw DataError(path + ": bad alphabet tag");
    index.alphabet_ = Alphabet(alpha);
    index.n_items_ = binio::read_u64(is, "count");
    index.scan_cost_ = binio::read_f64(is, "scan_cost");
    index.words_per_code_ = (index.code_len_ + kSymbolsPerWord - 1) / kSymbolsPerWord;

    index.item_words_.resize(index.n_items_ * index.words_per_code_);
    for (auto& w : index.item_words_) w = binio::read_u64(is, "codes");
    uint64_t n_offsets = binio::read_u64(is, "bucket count");
    index.bucket_offsets_.resize(n_offsets);
    for (auto& v : index.bucket_offsets_) v = binio::read_u64(is, "bucket offsets");
    index.bucket_ids_.resize(index.n_items_);
    for (auto& v : index.bucket_ids_) v = binio::read_u32(is, "bucket ids");
    index.bucket_words_.resize((n_offsets - 1) * index.words_per_code_);
    for (auto& w : index.bucket_words_) w = binio::read_u64(is, "bucket words");
    index.rebuild_lut();
    return index;
}

double calibrate_scan_cost(const CodeIndex& index, uint64_t seed) {
    using clock = std::chrono::steady_clock;
    Rng rng(seed);
    const size_t n_queries = std::min<size_t>(32, index.size());
    std::vector<std::vector<uint64_t>> queries;
    for (size_t i = 0; i < n_queries; ++i) {
        size_t id = size_t(rng.index(index.size()));
        queries.emplace_back(index.code_words(id),
                             index.code_words(id) + index.words_per_code());
    }

    // scan kernel: distance against every indexed item
    volatile unsigned sink = 0;
    uint64_t scanned = 0;
    auto t0 = clock::now();
    do {
        for (const auto& q : queries) {
            unsigned acc = 0;
            for (size_t id = 0; id < index.size(); ++id)
                acc += packed_distance(index.code_words(id), q.data(), index.words_per_code());
            sink = sink + acc;
            scanned += index.size();
        }
    } while (clock::now() - t0 < std::chrono::milliseconds(20));
    double scan_ns = double(std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0)
                            .count()) /
                     double(scanned);

    // probe kernel: radius-1 perturbation lookups
    uint64_t probes = 0;
    uint64_t hits = 0;
    auto t1 = clock::now();
    do {
        for (auto& q : queries) {
            probe_positions(q.data(), index.code_len(), 0, 1, index.alphabet(),
                            [&](const uint64_t* words) {
                                ++probes;
                                hits += index.find_bucket(words).second;
                            });
        }
    } while (clock::now() - t1 < std::chrono::milliseconds(20));
    double probe_ns = double(std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t1)
                             .count()) /
                      double(probes);
    (void)hits;

    double cost = scan_ns / std::max(probe_ns, 1e-3);
    return std::clamp(cost, 1e-3, 1e3);
}

}  // namespace ternhash
