#include "ternhash/codes.hpp"

#include <algorithm>
#include <set>

namespace ternhash {

TernaryCode::TernaryCode(std::vector<int8_t> s) : symbols(std::move(s)) {
    for (int8_t v : symbols) {
        if (v < -1 || v > 1) throw ArgumentError("TernaryCode: symbol outside {-1,0,+1}");
    }
}

std::string TernaryCode::to_text() const {
    std::string out;
    out.reserve(symbols.size());
    for (int8_t v : symbols) out.push_back(v == 0 ? '0' : (v > 0 ? '+' : '-'));
    return out;
}

TernaryCode TernaryCode::from_text(const std::string& text) {
    std::vector<int8_t> s;
    s.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '0': s.push_back(0); break;
            case '+': s.push_back(1); break;
            case '-': s.push_back(-1); break;
            default: throw ArgumentError(std::string("TernaryCode: bad character '") + c + "'");
        }
    }
    return TernaryCode(std::move(s));
}

std::vector<uint8_t> TernaryCode::pack() const {
    std::vector<uint8_t> bytes((symbols.size() + 3) / 4, 0);
    for (size_t j = 0; j < symbols.size(); ++j) {
        uint8_t field = symbols[j] == 0 ? 0u : (symbols[j] > 0 ? 1u : 2u);
        bytes[j / 4] |= uint8_t(field << (2 * (j % 4)));
    }
    return bytes;
}

TernaryCode TernaryCode::unpack(const std::vector<uint8_t>& bytes, size_t m) {
    if (bytes.size() != (m + 3) / 4) throw DimensionError("TernaryCode::unpack: byte count mismatch");
    std::vector<int8_t> s(m);
    for (size_t j = 0; j < m; ++j) {
        uint8_t field = (bytes[j / 4] >> (2 * (j % 4))) & 3u;
        if (field == 3u) throw DataError("TernaryCode::unpack: invalid symbol field");
        s[j] = field == 0 ? 0 : (field == 1 ? 1 : -1);
    }
    return TernaryCode(std::move(s));
}

unsigned hamming_distance(const TernaryCode& a, const TernaryCode& b) {
    check_dim(a.size() == b.size(), "hamming_distance: length mismatch");
    unsigned d = 0;
    for (size_t i = 0; i < a.size(); ++i) d += a.symbols[i] != b.symbols[i];
    return d;
}

TernaryCode quantize(const Vec& continuous, double threshold) {
    check_arg(threshold >= 0.0, "quantize: threshold must be nonnegative");
    std::vector<int8_t> s(size_t(continuous.size()));
    for (Eigen::Index i = 0; i < continuous.size(); ++i) {
        double v = continuous[i];
        s[size_t(i)] = std::abs(v) > threshold ? int8_t(v > 0 ? 1 : -1) : int8_t(0);
    }
    return TernaryCode(std::move(s));
}

double sparsity(const TernaryCode& code) {
    if (code.size() == 0) return 0.0;
    size_t nz = 0;
    for (int8_t v : code.symbols) nz += v != 0;
    return double(nz) / double(code.size());
}

CodeStats code_stats(const std::vector<TernaryCode>& db, const std::vector<unsigned>& radii) {
    check_arg(!db.empty(), "code_stats: empty database");
    const size_t m = db[0].size();
    for (const auto& c : db) check_dim(c.size() == m, "code_stats: length mismatch");

    CodeStats stats;
    std::set<std::vector<int8_t>> unique;
    for (const auto& c : db) unique.insert(c.symbols);
    stats.unique_code_count = unique.size();

    if (radii.empty()) return stats;
    unsigned max_r = *std::max_element(radii.begin(), radii.end());
    std::vector<uint64_t> within(max_r + 1, 0);  // pairs at distance <= r, by r
    for (const auto& q : db) {
        for (const auto& c : db) {
            unsigned d = hamming_distance(q, c);
            if (d <= max_r) within[d] += 1;
        }
    }
    // prefix-sum over distances gives ball counts
    for (unsigned r = 1; r <= max_r; ++r) within[r] += within[r - 1];
    for (unsigned r : radii) stats.avg_neighbors_at_r[r] = double(within[r]) / double(db.size());
    return stats;
}

}  // namespace ternhash
