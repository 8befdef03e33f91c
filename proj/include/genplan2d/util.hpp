#ifndef GENPLAN2D_UTIL_HPP
#define GENPLAN2D_UTIL_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace genplan2d {

// Errors raised on violated operation contracts (bad input, inapplicable
// action, unknown entity). Distinct from parse errors, which carry position.
struct contract_error : std::runtime_error {
    explicit contract_error(const std::string &msg) : std::runtime_error(msg) {}
};

inline uint64_t hash_mix(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return hash_mix(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline uint64_t hash_string(const std::string &s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/*
  Deterministic splittable RNG. Every sampling site derives its stream from
  (seed, site name, call index) so reruns reproduce samples bit-for-bit and
  samples are independent of evaluation order.
*/
class SplitRng {
public:
    SplitRng() : state_(0) {}
    explicit SplitRng(uint64_t key) : state_(hash_mix(key)) {}

    static SplitRng keyed(uint64_t seed, const std::string &site, uint64_t a = 0,
                          uint64_t b = 0, uint64_t c = 0) {
        uint64_t k = hash_combine(seed, hash_string(site));
        k = hash_combine(k, a);
        k = hash_combine(k, b);
        k = hash_combine(k, c);
        return SplitRng(k);
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return hash_mix(state_);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

private:
    uint64_t state_;
};

class Stopwatch {
public:
    Stopwatch() : start_(clock::now()) {}
    void reset() { start_ = clock::now(); }
    double seconds() const {
        return std::chrono::duration<double>(clock::now() - start_).count();
    }

private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_;
};

// Printed with enough digits to round-trip a double exactly.
std::string format_double(double v);

inline std::string format_double(double v) {
    char buf[64];
    snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
void sort_unique(std::vector<T> &v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace genplan2d

#endif
