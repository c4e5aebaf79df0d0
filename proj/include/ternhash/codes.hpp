#pragma once

#include "ternhash/common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ternhash {

// A length-m code over {-1, 0, +1}. Zeros mark inactive positions; the
// fraction of nonzeros is the code's sparsity.
struct TernaryCode {
    std::vector<int8_t> symbols;

    TernaryCode() = default;
    explicit TernaryCode(std::vector<int8_t> s);

    size_t size() const { return symbols.size(); }
    bool operator==(const TernaryCode& o) const { return symbols == o.symbols; }

    // text form, e.g. "+-0+0"
    std::string to_text() const;
    static TernaryCode from_text(const std::string& text);

    // packed form: 2 bits per symbol (00=0, 01=+1, 10=-1), little-endian
    // within bytes, i.e. symbol j sits at bit 2*(j%4) of byte j/4
    std::vector<uint8_t> pack() const;
    static TernaryCode unpack(const std::vector<uint8_t>& bytes, size_t m);
};

// Count of positions where the two codes differ. On codes without zeros this
// coincides with the +-1 Hamming distance m/2 - (1/2) * sum a_i * b_i.
unsigned hamming_distance(const TernaryCode& a, const TernaryCode& b);

// symbol_i = sign(z_i) if |z_i| > threshold, else 0
TernaryCode quantize(const Vec& continuous, double threshold = 0.0);

// fraction of nonzero symbols, in [0, 1]
double sparsity(const TernaryCode& code);

struct CodeStats {
    uint64_t unique_code_count = 0;
    // radius -> mean over queries of the number of database codes within it
    std::map<unsigned, double> avg_neighbors_at_r;
};

// Collision statistics of a code database queried against itself.
CodeStats code_stats(const std::vector<TernaryCode>& db, const std::vector<unsigned>& radii);

}  // namespace ternhash
