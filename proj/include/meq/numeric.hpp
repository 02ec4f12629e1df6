#ifndef MEQ_NUMERIC_HPP
#define MEQ_NUMERIC_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace meq {

using rng_t = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent seeds from (seed, index) tuples.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept
{
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

template <typename... Rest>
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, Rest... rest) noexcept
{
    return mix_seed(mix_seed(a, b), static_cast<std::uint64_t>(rest)...);
}

/// Uniform double in [0,1) with 53 random bits. Portable across standard libraries,
/// unlike std::uniform_real_distribution.
inline double uniform01(rng_t& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (-r, r).
inline double uniform_symmetric(rng_t& rng, double r)
{
    double u;
    do {
        u = 2.0 * uniform01(rng) - 1.0;
    } while (u == -1.0);
    return u * r;
}

inline std::uint64_t uniform_index(rng_t& rng, std::uint64_t n)
{
    if (n == 0) {
        throw std::invalid_argument("uniform_index: empty range");
    }
    // rejection keeps the draw unbiased
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

/**
 * Kahan-Babuska (Neumaier) compensated accumulator.
 */
class compensated_sum
{
public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }

    compensated_sum& operator+=(double v) noexcept
    {
        add(v);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Prefix sums P[0]=0, P[i+1]=P[i]+v[i], accumulated in extended precision.
/// Window sums P[j+L]-P[j] then carry error ~ulp(P) rather than N*ulp.
inline std::vector<long double> prefix_sums(std::span<const double> values)
{
    std::vector<long double> p(values.size() + 1, 0.0L);
    long double s = 0.0L;
    long double c = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const long double y = static_cast<long double>(values[i]) - c;
        const long double t = s + y;
        c = (t - s) - y;
        s = t;
        p[i + 1] = s;
    }
    return p;
}

/// Geometric schedule n_k = ceil(ratio^k), deduplicated, capped at `horizon`, always ending at `horizon`.
inline std::vector<std::size_t> geometric_schedule(std::size_t horizon, double ratio = 1.5)
{
    if (horizon == 0) {
        throw std::invalid_argument("geometric_schedule: horizon must be positive");
    }
    if (!(ratio > 1.0)) {
        throw std::invalid_argument("geometric_schedule: ratio must exceed 1");
    }
    std::vector<std::size_t> out;
    for (int k = 0;; ++k) {
        const double v = std::ceil(std::pow(ratio, k) - 1e-9);
        if (v >= static_cast<double>(horizon)) {
            break;
        }
        const auto n = static_cast<std::size_t>(v);
        if (out.empty() || out.back() != n) {
            out.push_back(n);
        }
    }
    out.push_back(horizon);
    return out;
}

/// Powers of two 1, 2, 4, ... not exceeding `limit` (at least {1}).
inline std::vector<std::size_t> dyadic_lengths(std::size_t limit)
{
    std::vector<std::size_t> out{1};
    while (out.back() * 2 <= limit) {
        out.push_back(out.back() * 2);
    }
    return out;
}

/// Index of the first element of the tail half (final ceil(size/2) entries).
constexpr std::size_t tail_half_begin(std::size_t size) noexcept
{
    return size / 2;
}

template <typename T>
void require_increasing(std::span<const T> values, const char* what)
{
    if (values.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty schedule");
    }
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i - 1] < values[i])) {
            throw std::invalid_argument(std::string(what) + ": schedule must be strictly increasing");
        }
    }
}

/// Worker count from MEQ_THREADS, falling back to the hardware concurrency.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("MEQ_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0,n) on up to worker_count() threads. Results must be written by index;
/// the first exception thrown is rethrown on the calling thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) {
                    return;
                }
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) {
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace meq

#endif
