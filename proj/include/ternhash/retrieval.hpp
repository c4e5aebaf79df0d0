#pragma once

#include "ternhash/codes.hpp"
#include "ternhash/common.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace ternhash {

enum class Alphabet : uint8_t { Ternary = 0, Binary = 1 };
enum class Strategy : uint8_t { Auto = 0, LutExact = 1, LutProbe = 2, BruteForce = 3 };

std::string strategy_name(Strategy s);

// Default per-item scan cost in probe units, used when the index is built
// without calibration. Chosen so that at N=59000, m=48 (ternary) the plan
// switches from probing to scanning between r=3 and r=4.
inline constexpr double kDefaultScanCost = 12.0;

// Immutable collision index over packed ternary codes. Codes are stored
// 2 bits per symbol in 64-bit words; identical codes share a bucket.
// Buckets are ordered lexicographically by packed words so that builds and
// serialized images are deterministic.
class CodeIndex {
public:
    CodeIndex() = default;

    size_t size() const { return n_items_; }
    size_t code_len() const { return code_len_; }
    size_t words_per_code() const { return words_per_code_; }
    Alphabet alphabet() const { return alphabet_; }
    double scan_cost() const { return scan_cost_; }
    void set_scan_cost(double c) { scan_cost_ = c; }
    size_t bucket_count() const { return bucket_offsets_.empty() ? 0 : bucket_offsets_.size() - 1; }

    const uint64_t* code_words(size_t id) const { return item_words_.data() + id * words_per_code_; }
    TernaryCode code(size_t id) const;

    friend CodeIndex build_index(const std::vector<TernaryCode>& codes, Alphabet alphabet,
                                 double scan_cost);
    friend void save_index(const CodeIndex& index, const std::string& path);
    friend CodeIndex load_index(const std::string& path);

    // bucket lookup; returns (offset, count) into ids() or count 0
    std::pair<uint64_t, uint64_t> find_bucket(const uint64_t* words) const;
    const std::vector<uint32_t>& ids() const { return bucket_ids_; }
    const std::vector<uint64_t>& bucket_offsets() const { return bucket_offsets_; }

private:
    size_t n_items_ = 0;
    size_t code_len_ = 0;
    size_t words_per_code_ = 0;
    Alphabet alphabet_ = Alphabet::Ternary;
    double scan_cost_ = kDefaultScanCost;

    std::vector<uint64_t> item_words_;      // n_items * words_per_code
    std::vector<uint32_t> bucket_ids_;      // item ids grouped by bucket
    std::vector<uint64_t> bucket_offsets_;  // bucket_count+1 offsets into bucket_ids_
    std::vector<uint64_t> bucket_words_;    // bucket_count * words_per_code, lexicographic
    std::unordered_map<uint64_t, std::vector<uint32_t>> lut_;  // word hash -> bucket indices

    void rebuild_lut();
};

struct QueryPlan {
    Strategy strategy = Strategy::LutExact;
    unsigned radius = 0;
    double est_probe_cost = 0;  // in probe units
    double est_scan_cost = 0;
};

struct QueryStats {
    uint64_t probes = 0;   // LUT lookups performed
    uint64_t scanned = 0;  // items distance-checked by the scan kernel
    Strategy used = Strategy::Auto;
};

// Pack a code into 2-bit fields (00=0, 01=+1, 10=-1), 32 symbols per word.
std::vector<uint64_t> pack_words(const TernaryCode& code);
TernaryCode unpack_words(const uint64_t* words, size_t m);

// Mismatch count between two packed codes.
unsigned packed_distance(const uint64_t* a, const uint64_t* b, size_t n_words);

// Number of LUT probes needed for a radius-r ball: sum over j<=r of
// C(m,j) * 2^j for the ternary alphabet (each changed position has two
// alternative symbols) or C(m,j) for binary (sign flip only). Saturates
// at UINT64_MAX.
uint64_t probe_cost(size_t m, unsigned r, Alphabet alphabet);

CodeIndex build_index(const std::vector<TernaryCode>& codes,
                      Alphabet alphabet = Alphabet::Ternary,
                      double scan_cost = kDefaultScanCost);

// All item ids whose code lies within Hamming distance r of q, ascending.
// The result is strategy-independent; Auto follows plan_query.
std::vector<uint32_t> query(const CodeIndex& index, const TernaryCode& q, unsigned r,
                            Strategy strategy = Strategy::Auto, QueryStats* stats = nullptr);

// Picks lut_exact at r=0, otherwise whichever of probing and scanning has
// the lower estimated cost under the index's scan-cost constant.
QueryPlan plan_query(const CodeIndex& index, unsigned r);

// Item ids by increasing Hamming distance from q, ties by ascending id.
std::vector<uint32_t> rank_all(const CodeIndex& index, const TernaryCode& q, size_t limit);

void save_index(const CodeIndex& index, const std::string& path);
CodeIndex load_index(const std::string& path);

// Measures the scan kernel against the probe kernel on the indexed data and
// returns the per-item scan cost in probe units.
double calibrate_scan_cost(const CodeIndex& index, uint64_t seed = 1);

}  // namespace ternhash
