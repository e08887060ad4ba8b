#ifndef MVSEG_RNG_HPP
#define MVSEG_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mvseg {

// mt19937_64 with explicit distributions so streams are bit-reproducible
// across standard libraries (std::normal_distribution is not portable).
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) {
        // modulo bias is negligible for n << 2^64 and irrelevant here
        return gen_() % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; one value per call, cached pair discarded for simplicity
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    // Derives an independent substream, e.g. per subject or per fold.
    static uint64_t substream(uint64_t seed, uint64_t index) {
        // splitmix64 of (seed, index)
        uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace mvseg

#endif
