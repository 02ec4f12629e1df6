#ifndef MEQ_SEQUENCES_HPP
#define MEQ_SEQUENCES_HPP

#include <meq/state_space.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <vector>

namespace meq {

/// Eventually periodic sequence: `prefix` followed by `period` repeated forever.
class word_sequence final : public symbol_sequence
{
public:
    word_sequence(std::vector<symbol_t> prefix, std::vector<symbol_t> period, unsigned alphabet = 2)
        : symbol_sequence(alphabet), prefix_(std::move(prefix)), period_(std::move(period))
    {
        if (period_.empty()) {
            throw std::invalid_argument("word_sequence: period must be non-empty");
        }
        for (auto s : prefix_) {
            check(s);
        }
        for (auto s : period_) {
            check(s);
        }
    }

    /// Parses "0001" style words (digits only).
    static std::vector<symbol_t> word(const std::string& digits)
    {
        std::vector<symbol_t> w;
        for (char c : digits) {
            if (c < '0' || c > '9') {
                throw std::invalid_argument("word_sequence: bad digit");
            }
            w.push_back(static_cast<symbol_t>(c - '0'));
        }
        return w;
    }

    static sequence_ptr make(const std::string& prefix, const std::string& period, unsigned alphabet = 2)
    {
        return std::make_shared<word_sequence>(word(prefix), word(period), alphabet);
    }

    nlohmann::json describe() const override
    {
        return {{"type", "word"}, {"prefix", prefix_}, {"period", period_}};
    }

protected:
    symbol_t generate(std::uint64_t i) const override
    {
        if (i < prefix_.size()) {
            return prefix_[static_cast<std::size_t>(i)];
        }
        return period_[static_cast<std::size_t>((i - prefix_.size()) % period_.size())];
    }

private:
    void check(symbol_t s) const
    {
        if (s >= alphabet()) {
            throw std::invalid_argument("word_sequence: symbol outside alphabet");
        }
    }

    std::vector<symbol_t> prefix_;
    std::vector<symbol_t> period_;
};

/// Exact binary expansion of p/q in [0,1) as an eventually periodic word.
inline sequence_ptr rational_expansion(std::uint64_t p, std::uint64_t q)
{
    if (q == 0 || p >= q || q > (std::uint64_t{1} << 62)) {
        throw std::invalid_argument("rational_expansion: need 0 <= p < q <= 2^62");
    }
    std::vector<symbol_t> digits;
    std::vector<std::uint64_t> seen;
    std::uint64_t r = p;
    while (true) {
        auto it = std::find(seen.begin(), seen.end(), r);
        if (it != seen.end()) {
            const auto start = static_cast<std::size_t>(it - seen.begin());
            std::vector<symbol_t> prefix(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(start));
            std::vector<symbol_t> period(digits.begin() + static_cast<std::ptrdiff_t>(start), digits.end());
            return std::make_shared<word_sequence>(std::move(prefix), std::move(period));
        }
        if (seen.size() > 4096) {
            throw std::invalid_argument("rational_expansion: period too long");
        }
        seen.push_back(r);
        r *= 2;
        digits.push_back(r >= q ? 1 : 0);
        if (r >= q) {
            r -= q;
        }
    }
}

/// Pseudo-random sequence from a counter-based hash. Stands in for a generic point.
class hashed_sequence final : public symbol_sequence
{
public:
    explicit hashed_sequence(std::uint64_t seed, unsigned alphabet = 2) : symbol_sequence(alphabet), seed_(seed) {}

    nlohmann::json describe() const override
    {
        return {{"type", "hashed"}, {"seed", seed_}, {"alphabet", alphabet()}};
    }

protected:
    symbol_t generate(std::uint64_t i) const override
    {
        return static_cast<symbol_t>(mix_seed(seed_, i) % alphabet());
    }

private:
    std::uint64_t seed_;
};

/// head[0, head_length) followed by tail read from `tail_offset`.
class spliced_sequence final : public symbol_sequence
{
public:
    spliced_sequence(std::vector<symbol_t> head, sequence_ptr tail, std::uint64_t tail_offset)
        : symbol_sequence(tail->alphabet()), head_(std::move(head)), tail_(std::move(tail)), tail_offset_(tail_offset)
    {
    }

    nlohmann::json describe() const override
    {
        return {{"type", "spliced"}, {"head", head_}, {"tail", tail_->describe()}, {"tail_offset", tail_offset_}};
    }

protected:
    symbol_t generate(std::uint64_t i) const override
    {
        if (i < head_.size()) {
            return head_[static_cast<std::size_t>(i)];
        }
        return tail_->at(tail_offset_ + (i - head_.size()));
    }

    void generate_block(std::uint64_t start, std::span<symbol_t> out) const override
    {
        std::size_t k = 0;
        for (; k < out.size() && start + k < head_.size(); ++k) {
            out[k] = head_[static_cast<std::size_t>(start + k)];
        }
        if (k < out.size()) {
            tail_->read(tail_offset_ + (start + k - head_.size()), out.subspan(k));
        }
    }

private:
    std::vector<symbol_t> head_;
    sequence_ptr tail_;
    std::uint64_t tail_offset_;
};

/// 64-bit fixed-point representation of a number in [0,1): round(v * 2^64).
inline std::uint64_t to_fixed64(long double v)
{
    v -= std::floor(v);
    const long double scaled = std::floor(std::ldexp(v, 64) + 0.5L);
    if (scaled >= std::ldexp(1.0L, 64)) {
        return 0; // rounds up to 1 ≡ 0
    }
    return static_cast<std::uint64_t>(scaled);
}

inline long double from_fixed64(std::uint64_t v)
{
    return std::ldexp(static_cast<long double>(v), -64);
}

/**
 * Sturmian coding of the rotation θ ↦ θ + α: symbol i is 1 iff θ + iα mod 1 lies in
 * [1-α, 1), equivalently ⌊(i+1)α + θ⌋ - ⌊iα + θ⌋.
 *
 * α and θ are held as 64-bit fixed-point fractions and θ + iα is evaluated by exact
 * modular integer arithmetic, so the coding has no accumulated floating error at any index.
 */
class sturmian_sequence final : public symbol_sequence
{
public:
    sturmian_sequence(std::uint64_t alpha_fixed, std::uint64_t theta_fixed)
        : symbol_sequence(2), alpha_(alpha_fixed), theta_(theta_fixed), threshold_(std::uint64_t{0} - alpha_fixed)
    {
        if (alpha_fixed == 0) {
            throw std::invalid_argument("sturmian_sequence: alpha must be non-zero");
        }
    }

    std::uint64_t alpha_fixed() const noexcept { return alpha_; }
    std::uint64_t theta_fixed() const noexcept { return theta_; }

    /// Rotation point θ + iα in fixed point.
    std::uint64_t rotation_point(std::uint64_t i) const noexcept { return theta_ + i * alpha_; }

    nlohmann::json describe() const override
    {
        return {{"type", "sturmian"},
                {"alpha_fixed64", alpha_},
                {"theta_fixed64", theta_},
                {"alpha", static_cast<double>(from_fixed64(alpha_))},
                {"theta", static_cast<double>(from_fixed64(theta_))}};
    }

protected:
    symbol_t generate(std::uint64_t i) const override
    {
        return rotation_point(i) >= threshold_ ? 1 : 0;
    }

    void generate_block(std::uint64_t start, std::span<symbol_t> out) const override
    {
        std::uint64_t v = rotation_point(start);
        for (auto& s : out) {
            s = v >= threshold_ ? 1 : 0;
            v += alpha_;
        }
    }

private:
    std::uint64_t alpha_;
    std::uint64_t theta_;
    std::uint64_t threshold_;
};

/// Prouhet–Thue–Morse sequence: t_i = parity of the binary digit sum of i.
class thue_morse_sequence final : public symbol_sequence
{
public:
    thue_morse_sequence() : symbol_sequence(2) {}

    nlohmann::json describe() const override { return {{"type", "thue_morse"}}; }

protected:
    symbol_t generate(std::uint64_t i) const override
    {
        return static_cast<symbol_t>(std::popcount(i) & 1);
    }
};

/// 0^1 1^1 0^2 1^2 0^4 1^4 ...: block pairs doubling in length.
class doubling_blocks_sequence final : public symbol_sequence
{
public:
    doubling_blocks_sequence() : symbol_sequence(2) {}

    nlohmann::json describe() const override { return {{"type", "doubling_blocks"}}; }

protected:
    symbol_t generate(std::uint64_t i) const override
    {
        // pair k occupies [2^{k+1}-2, 2^{k+2}-2): zeros then ones, each of length 2^k
        const std::uint64_t j = i + 2;
        const int k = std::bit_width(j) - 2;
        const std::uint64_t start = (std::uint64_t{1} << (k + 1)) - 2;
        return (i - start) >= (std::uint64_t{1} << k) ? 1 : 0;
    }
};

} // namespace meq

#endif
