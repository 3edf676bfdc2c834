// SPDX-License-Identifier: Apache-2.0
//
// Shared utilities for the gwbeam library: deterministic RNG streams,
// seed derivation, hashing, error types and a small thread-pool helper.

#ifndef GWBEAM_COMMON_HPP
#define GWBEAM_COMMON_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gwbeam {

inline constexpr double kPi = 3.14159265358979323846;

using cd = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors

struct dimension_error : std::runtime_error {
    explicit dimension_error(const std::string& m) : std::runtime_error(m) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& m) : std::runtime_error(m) {}
};

struct sampling_error : std::runtime_error {
    explicit sampling_error(const std::string& m) : std::runtime_error(m) {}
};

// Raised when the SRL fixed-point bracket contains no sign change.
struct srl_range_error : std::runtime_error {
    explicit srl_range_error(const std::string& m) : std::runtime_error(m) {}
};

// Raised when a posterior support grows past the number of observations.
struct overdense_error : std::runtime_error {
    explicit overdense_error(const std::string& m) : std::runtime_error(m) {}
};

// Raised for angle configurations whose Fisher information is singular.
struct unresolvable_error : std::runtime_error {
    explicit unresolvable_error(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// Seeding and hashing

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable seed for a (base, indices...) tuple. Used to give every Monte-Carlo
// trial its own stream while keeping runs reproducible from one base seed.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
    std::uint64_t s = base;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t p : parts) {
        s ^= p + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        out = splitmix64(s);
    }
    return out;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_doubles(const double* v, std::size_t n,
                                  std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &v[i], sizeof bits);
        h = fnv1a64(&bits, sizeof bits, h);
    }
    return h;
}

// ---------------------------------------------------------------------------
// RNG
//
// All randomness flows through this wrapper so that results depend only on
// the seed, never on platform distribution implementations. uniform() maps
// the top 53 bits of the engine output; normals use Box-Muller explicitly.

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : s_(seed) {
        // Warm the state through splitmix so nearby seeds decorrelate.
        for (int i = 0; i < 2; ++i) (void)splitmix64(s_);
    }

    std::uint64_t u64() { return splitmix64(s_); }

    double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex normal with unit total variance.
    cd cnormal() {
        return cd(normal(), normal()) * (1.0 / std::sqrt(2.0));
    }

    cd phase() {
        double a = 2.0 * kPi * uniform();
        return cd(std::cos(a), std::sin(a));
    }

  private:
    std::uint64_t s_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Parallel loop helper
//
// Thread count comes from GWBEAM_THREADS when set, otherwise the hardware
// count. Work items must be independent; results should be written to
// per-index slots so scheduling cannot change the outcome.

inline unsigned thread_count() {
    if (const char* env = std::getenv("GWBEAM_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v <= 1024) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1u;
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned workers = thread_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace gwbeam

#endif // GWBEAM_COMMON_HPP
