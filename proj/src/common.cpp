#include "ternhash/common.hpp"

#include <algorithm>
#include <cstdio>

namespace ternhash {

std::vector<size_t> Rng::sample(size_t n, size_t k) {
    if (k > n) throw ArgumentError("Rng::sample: k > n");
    // Floyd's algorithm keeps the draw count at k regardless of n.
    std::vector<size_t> out;
    out.reserve(k);
    for (size_t j = n - k; j < n; ++j) {
        size_t t = size_t(index(j + 1));
        if (std::find(out.begin(), out.end(), t) == out.end()) {
            out.push_back(t);
        } else {
            out.push_back(j);
        }
    }
    return out;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

}  // namespace ternhash
