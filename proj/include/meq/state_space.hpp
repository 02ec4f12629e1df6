#ifndef MEQ_STATE_SPACE_HPP
#define MEQ_STATE_SPACE_HPP

#include <meq/numeric.hpp>
#include <meq/trace.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace meq {

using symbol_t = std::uint8_t;

/// Default memoization cap for symbolic generators (symbols per sequence).
inline constexpr std::size_t default_memo_cap = std::size_t{1} << 26;

/**
 * A pure, deterministic one-sided sequence over {0, ..., alphabet-1}.
 *
 * Symbols below the memo cap are cached in fixed-size chunks published through
 * atomic pointers, so concurrent readers never observe a partially filled chunk.
 * Indices at or beyond the cap are recomputed from the generator on every access.
 */
class symbol_sequence
{
public:
    static constexpr std::size_t chunk_bits = 16;
    static constexpr std::size_t chunk_size = std::size_t{1} << chunk_bits;

    explicit symbol_sequence(unsigned alphabet, std::size_t memo_cap = default_memo_cap)
        : alphabet_(alphabet)
        , slot_count_((memo_cap + chunk_size - 1) / chunk_size)
        , slots_(std::make_unique<std::atomic<symbol_t*>[]>(slot_count_))
        , owned_(slot_count_)
    {
        if (alphabet < 2) {
            throw std::invalid_argument("symbol_sequence: alphabet must have at least two symbols");
        }
        for (std::size_t i = 0; i < slot_count_; ++i) {
            slots_[i].store(nullptr, std::memory_order_relaxed);
        }
    }

    symbol_sequence(const symbol_sequence&) = delete;
    symbol_sequence& operator=(const symbol_sequence&) = delete;
    virtual ~symbol_sequence() = default;

    unsigned alphabet() const noexcept { return alphabet_; }
    std::size_t memo_cap() const noexcept { return slot_count_ * chunk_size; }

    symbol_t at(std::uint64_t i) const
    {
        const std::uint64_t c = i >> chunk_bits;
        if (c < slot_count_) {
            return chunk(static_cast<std::size_t>(c))[i & (chunk_size - 1)];
        }
        return generate(i);
    }

    /// Bulk read of symbols [start, start + out.size()).
    void read(std::uint64_t start, std::span<symbol_t> out) const
    {
        std::size_t done = 0;
        while (done < out.size()) {
            const std::uint64_t i = start + done;
            const std::uint64_t c = i >> chunk_bits;
            if (c >= slot_count_) {
                generate_block(i, out.subspan(done));
                return;
            }
            const std::size_t within = static_cast<std::size_t>(i & (chunk_size - 1));
            const std::size_t take = std::min(out.size() - done, chunk_size - within);
            std::memcpy(out.data() + done, chunk(static_cast<std::size_t>(c)) + within, take);
            done += take;
        }
    }

    /// Structured description sufficient to regenerate the sequence.
    virtual nlohmann::json describe() const = 0;

protected:
    virtual symbol_t generate(std::uint64_t i) const = 0;

    virtual void generate_block(std::uint64_t start, std::span<symbol_t> out) const
    {
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] = generate(start + k);
        }
    }

private:
    const symbol_t* chunk(std::size_t c) const
    {
        symbol_t* p = slots_[c].load(std::memory_order_acquire);
        if (p != nullptr) {
            return p;
        }
        std::lock_guard<std::mutex> lock(fill_mutex_);
        p = slots_[c].load(std::memory_order_acquire);
        if (p == nullptr) {
            owned_[c] = std::make_unique<symbol_t[]>(chunk_size);
            generate_block(static_cast<std::uint64_t>(c) << chunk_bits, std::span<symbol_t>(owned_[c].get(), chunk_size));
            p = owned_[c].get();
            slots_[c].store(p, std::memory_order_release);
        }
        return p;
    }

    unsigned alphabet_;
    std::size_t slot_count_;
    std::unique_ptr<std::atomic<symbol_t*>[]> slots_;
    mutable std::mutex fill_mutex_;
    mutable std::vector<std::unique_ptr<symbol_t[]>> owned_;
};

using sequence_ptr = std::shared_ptr<const symbol_sequence>;

/// Point of a torus, interval or other real box: one coordinate per factor.
struct real_point
{
    std::vector<double> coords;

    friend bool operator==(const real_point&, const real_point&) = default;
};

/// Point of a one-sided shift space: the sequence read from `offset` onward.
struct symbolic_point
{
    sequence_ptr sequence;
    std::uint64_t offset = 0;

    symbol_t operator[](std::uint64_t i) const { return sequence->at(offset + i); }

    void read(std::uint64_t start, std::span<symbol_t> out) const { sequence->read(offset + start, out); }

    unsigned alphabet() const { return sequence->alphabet(); }
};

/// Element of a finite metric space.
struct finite_point
{
    std::size_t id = 0;

    friend bool operator==(const finite_point&, const finite_point&) = default;
};

class point;

/// Point of a product system, one component per factor.
struct product_point
{
    std::vector<point> parts;
};

enum class space_kind { torus, interval, symbolic, finite, product };

inline const char* to_string(space_kind k)
{
    switch (k) {
    case space_kind::torus: return "torus";
    case space_kind::interval: return "interval";
    case space_kind::symbolic: return "symbolic";
    case space_kind::finite: return "finite";
    case space_kind::product: return "product";
    }
    return "unknown";
}

class point
{
public:
    using storage = std::variant<real_point, symbolic_point, finite_point, product_point>;

    point() : value_(real_point{}) {}
    point(real_point p) : value_(std::move(p)) {}
    point(symbolic_point p) : value_(std::move(p)) {}
    point(finite_point p) : value_(p) {}
    point(product_point p) : value_(std::move(p)) {}

    template <typename T>
    bool holds() const noexcept
    {
        return std::holds_alternative<T>(value_);
    }

    template <typename T>
    const T& as() const
    {
        if (const T* p = std::get_if<T>(&value_)) {
            return *p;
        }
        throw std::invalid_argument("point: representation does not match this space");
    }

    const storage& value() const noexcept { return value_; }

private:
    storage value_;
};

inline point make_real(double x) { return real_point{{x}}; }
inline point make_symbolic(sequence_ptr s, std::uint64_t offset = 0) { return symbolic_point{std::move(s), offset}; }
inline point make_finite(std::size_t id) { return finite_point{id}; }
inline point make_product(std::vector<point> parts) { return product_point{std::move(parts)}; }

/// Structured, human-checkable description of a point.
inline nlohmann::json describe(const point& p, std::size_t symbol_preview = 32)
{
    using nlohmann::json;
    return std::visit(
        [&](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, real_point>) {
                return json{{"kind", "real"}, {"coords", v.coords}};
            } else if constexpr (std::is_same_v<T, symbolic_point>) {
                std::vector<symbol_t> buf(symbol_preview);
                v.read(0, buf);
                std::string prefix;
                for (auto s : buf) {
                    prefix.push_back(static_cast<char>(s < 10 ? '0' + s : 'a' + (s - 10)));
                }
                return json{{"kind", "symbolic"}, {"offset", v.offset}, {"sequence", v.sequence->describe()}, {"prefix", prefix}};
            } else if constexpr (std::is_same_v<T, finite_point>) {
                return json{{"kind", "finite"}, {"id", v.id}};
            } else {
                json parts = json::array();
                for (const auto& q : v.parts) {
                    parts.push_back(describe(q, symbol_preview));
                }
                return json{{"kind", "product"}, {"parts", parts}};
            }
        },
        p.value());
}

/// Order-independent 64-bit fingerprint; used to canonicalize pair order in randomized searches.
inline std::uint64_t fingerprint(const point& p)
{
    return std::visit(
        [](const auto& v) -> std::uint64_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, real_point>) {
                std::uint64_t h = 0x1234;
                for (double c : v.coords) {
                    std::uint64_t bits;
                    std::memcpy(&bits, &c, sizeof bits);
                    h = mix_seed(h, bits);
                }
                return h;
            } else if constexpr (std::is_same_v<T, symbolic_point>) {
                std::array<symbol_t, 512> buf{};
                v.read(0, buf);
                std::uint64_t h = 0x5678;
                for (std::size_t i = 0; i < buf.size(); i += 8) {
                    std::uint64_t word;
                    std::memcpy(&word, buf.data() + i, 8);
                    h = mix_seed(h, word);
                }
                return h;
            } else if constexpr (std::is_same_v<T, finite_point>) {
                return mix_seed(0x9abc, v.id);
            } else {
                std::uint64_t h = 0xdef0;
                for (const auto& q : v.parts) {
                    h = mix_seed(h, fingerprint(q));
                }
                return h;
            }
        },
        p.value());
}

struct capabilities
{
    bool can_sample_points = false;
    bool can_sample_near = false;
    bool has_known_classification = false;
    /// Arbitrary concatenation head[0,k) + tail stays in the space (full shifts).
    bool can_splice = false;
};

/**
 * A compact metric space with a continuous self-map.
 *
 * Implementations are immutable after construction; every member may be called
 * concurrently. Subclasses override distance_trace / advance when the generic
 * step-by-step evaluation has a faster exact equivalent.
 */
class dynamical_system
{
public:
    dynamical_system(std::string id, space_kind kind, double diameter)
        : id_(std::move(id)), kind_(kind), diameter_(diameter)
    {
    }

    virtual ~dynamical_system() = default;

    const std::string& id() const noexcept { return id_; }
    space_kind kind() const noexcept { return kind_; }
    double diameter_bound() const noexcept { return diameter_; }

    virtual capabilities caps() const = 0;

    /// True if `p` uses this space's representation (and lies in range).
    virtual bool contains(const point& p) const = 0;

    virtual double distance(const point& a, const point& b) const = 0;

    virtual point step(const point& p) const = 0;

    virtual point advance(const point& p, std::uint64_t n) const
    {
        point q = p;
        for (std::uint64_t i = 0; i < n; ++i) {
            q = step(q);
        }
        return q;
    }

    /// Writes d(T^i x, T^i y) for i in [0, out.size()).
    virtual void distance_trace(const point& x, const point& y, std::span<double> out) const
    {
        point a = x;
        point b = y;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = distance(a, b);
            if (i + 1 < out.size()) {
                a = step(a);
                b = step(b);
            }
        }
    }

    /// Smallest radius for which sample_near can still produce a distinct nearby point.
    virtual double resolution() const { return 0.0; }

    /// The map preserves the metric (enables analytic impossibility certificates).
    virtual bool is_isometry() const { return false; }

    /// Orbits are exact only on symbolic data; used to pick the horizon class.
    virtual bool is_symbolic_like() const { return kind_ == space_kind::symbolic; }

    virtual point sample_point(rng_t&) const
    {
        throw std::logic_error(id_ + ": point sampling not supported");
    }

    /// A point q with d(p,q) < radius.
    virtual point sample_near(const point&, double, rng_t&) const
    {
        throw std::logic_error(id_ + ": near-point sampling not supported");
    }

    /// Point agreeing with `head` on its first `length` coordinates and continuing as `tail`.
    virtual point splice(const point&, std::size_t, const point&) const
    {
        throw std::logic_error(id_ + ": splicing not supported");
    }

private:
    std::string id_;
    space_kind kind_;
    double diameter_;
};

using system_ptr = std::shared_ptr<const dynamical_system>;

inline void require_member(const dynamical_system& sys, const point& p, const char* what)
{
    if (!sys.contains(p)) {
        throw std::invalid_argument(std::string(what) + ": point does not belong to system '" + sys.id() + "'");
    }
}

/// T^n x.
inline point iterate(const dynamical_system& sys, const point& x, std::uint64_t n)
{
    require_member(sys, x, "iterate");
    return sys.advance(x, n);
}

/// trace[i] = d(T^i x, T^i y), i in [0, n).
inline real_trace orbit_distance_trace(const dynamical_system& sys, const point& x, const point& y, std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("orbit_distance_trace: n must be at least 1");
    }
    require_member(sys, x, "orbit_distance_trace");
    require_member(sys, y, "orbit_distance_trace");
    real_trace out(n);
    sys.distance_trace(x, y, out);
    return out;
}

/// Indicator of N(x, U) ∩ [0, n).
template <typename Pred>
index_trace hitting_trace(const dynamical_system& sys, const point& x, Pred&& inside, std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("hitting_trace: n must be at least 1");
    }
    require_member(sys, x, "hitting_trace");
    std::vector<std::uint8_t> bits(n);
    point p = x;
    for (std::size_t i = 0; i < n; ++i) {
        bits[i] = inside(p) ? 1 : 0;
        if (i + 1 < n) {
            p = sys.step(p);
        }
    }
    return index_trace(std::move(bits));
}

/**
 * Materialized orbit segment x, Tx, ..., T^{N-1}x.
 */
class orbit
{
public:
    orbit(const dynamical_system& sys, point base, std::size_t horizon)
    {
        if (horizon == 0) {
            throw std::invalid_argument("orbit: horizon must be at least 1");
        }
        require_member(sys, base, "orbit");
        points_.reserve(horizon);
        points_.push_back(std::move(base));
        for (std::size_t i = 1; i < horizon; ++i) {
            points_.push_back(sys.step(points_.back()));
        }
    }

    std::size_t horizon() const noexcept { return points_.size(); }
    const point& base() const noexcept { return points_.front(); }
    const point& operator[](std::size_t i) const { return points_.at(i); }

private:
    std::vector<point> points_;
};

} // namespace meq

#endif
