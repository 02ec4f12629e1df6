#ifndef MEQ_TRACE_HPP
#define MEQ_TRACE_HPP

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace meq {

/// Real-valued time series over indices 0..N-1 (e.g. d(T^i x, T^i y)).
using real_trace = std::vector<double>;

/**
 * Indicator of an index set F truncated to [0, N).
 */
class index_trace
{
public:
    index_trace() = default;

    explicit index_trace(std::vector<std::uint8_t> bits) : bits_(std::move(bits))
    {
        for (auto& b : bits_) {
            b = b ? 1 : 0;
        }
    }

    index_trace(std::size_t n, bool value) : bits_(n, value ? 1 : 0) {}

    template <typename Pred>
    static index_trace from_predicate(std::size_t n, Pred&& pred)
    {
        std::vector<std::uint8_t> bits(n);
        for (std::size_t i = 0; i < n; ++i) {
            bits[i] = pred(i) ? 1 : 0;
        }
        return index_trace(std::move(bits));
    }

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_.at(i) = v ? 1 : 0; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    std::size_t count() const noexcept
    {
        std::size_t c = 0;
        for (auto b : bits_) {
            c += b;
        }
        return c;
    }

    /// Cumulative counts C[0]=0, C[i+1]=#(F ∩ [0,i]).
    std::vector<std::uint64_t> cumulative() const
    {
        std::vector<std::uint64_t> c(bits_.size() + 1, 0);
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            c[i + 1] = c[i] + bits_[i];
        }
        return c;
    }

    friend bool operator==(const index_trace&, const index_trace&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Runs encoding: alternating run lengths of false/true, starting with false.
/// "0 3 2" is 111 then 00. A leading zero run length is allowed.
inline std::string to_runs(const index_trace& t)
{
    std::ostringstream os;
    bool current = false;
    std::size_t run = 0;
    bool first = true;
    auto flush = [&] {
        if (!first) {
            os << ' ';
        }
        os << run;
        first = false;
    };
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == current) {
            ++run;
        } else {
            flush();
            current = !current;
            run = 1;
        }
    }
    if (run > 0 || first) {
        flush();
    }
    return os.str();
}

inline index_trace parse_runs(std::string_view text)
{
    std::vector<std::uint8_t> bits;
    std::istringstream is{std::string(text)};
    std::string token;
    bool value = false;
    bool any = false;
    while (is >> token) {
        std::size_t pos = 0;
        unsigned long long len = 0;
        try {
            len = std::stoull(token, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("parse_runs: bad run length '" + token + "'");
        }
        if (pos != token.size() || token.front() == '-') {
            throw std::invalid_argument("parse_runs: bad run length '" + token + "'");
        }
        bits.insert(bits.end(), static_cast<std::size_t>(len), value ? 1 : 0);
        value = !value;
        any = true;
    }
    if (!any) {
        throw std::invalid_argument("parse_runs: empty encoding");
    }
    return index_trace(std::move(bits));
}

} // namespace meq

#endif
