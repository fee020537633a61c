#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace affwalk {

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct singular_input : error {
    using error::error;
};
struct bad_degree : error {
    using error::error;
};
struct rank_deficient : error {
    using error::error;
};
struct block_structure_violated : error {
    using error::error;
};
/// Raised when a wedge vector has (numerically) no component transverse to
/// the invariant block, i.e. the point has fallen onto the excluded locus.
struct degenerate_wedge : error {
    using error::error;
};
struct parse_error : error {
    using error::error;
};
struct validation_error : error {
    using error::error;
};

// ---------------------------------------------------------------------------
// Deterministic pseudo-random stream (SplitMix64)
//
// Counter-style generator: the output sequence is a pure function of the
// 64-bit seed, identical on every platform. Substreams are derived by
// hashing (seed, index), so replica r of a scenario is reproducible
// independently of scheduling.
// ---------------------------------------------------------------------------

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next01(); }

    /// Index in [0, n).
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(next01() * static_cast<double>(n)) % n;
    }

  private:
    std::uint64_t state_;
};

/// Substream seed for replica/word `index` of a scenario seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ull));
}

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, n). Each index owns its output slot, so results
/// are identical for any worker count.
template <class F> void parallel_for(std::size_t n, unsigned workers, F&& body) {
    if (workers == 0) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned count = workers < n ? workers : static_cast<unsigned>(n);
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
}

inline unsigned default_workers() {
    unsigned h = std::thread::hardware_concurrency();
    return h ? h : 1;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Serializes a double with 17 significant digits (round-trip exact).
inline std::string fmt17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::size_t r = 1;
    for (std::size_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

} // namespace affwalk
