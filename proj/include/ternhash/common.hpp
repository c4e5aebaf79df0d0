#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ternhash {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. The CLI maps these onto exit codes, so library code
// should throw the most specific one that applies.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

inline void check_dim(bool ok, const std::string& msg) {
    if (!ok) throw DimensionError(msg);
}
inline void check_arg(bool ok, const std::string& msg) {
    if (!ok) throw ArgumentError(msg);
}

// Deterministic random source. All randomness in the library flows through
// this class; the generation algorithms are spelled out (Fisher-Yates,
// Box-Muller, rejection sampling) so that a given seed produces the same
// stream on any platform, independent of the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [0, n), unbiased
    uint64_t index(uint64_t n) {
        if (n == 0) throw ArgumentError("Rng::index: n must be positive");
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn from [0, n), in draw order
    std::vector<size_t> sample(size_t n, size_t k);

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a over a string; used for config hashes and LUT keys.
inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v);

}  // namespace ternhash
