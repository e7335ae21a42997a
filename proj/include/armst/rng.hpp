#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace armst {

// Random stream keyed by (seed, stream ids). Two streams with the same key
// produce identical draws no matter which thread or in what order they run,
// which is what makes bootstrap and simulation results independent of the
// worker count.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
        std::vector<std::uint32_t> key;
        key.reserve(2 + 2 * stream.size());
        push(key, seed);
        for (auto id : stream) push(key, id);
        std::seed_seq seq(key.begin(), key.end());
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    // Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    static void push(std::vector<std::uint32_t>& key, std::uint64_t v) {
        key.push_back(static_cast<std::uint32_t>(v));
        key.push_back(static_cast<std::uint32_t>(v >> 32));
    }

    std::mt19937_64 engine_;
};

}  // namespace armst
