#ifndef MEQ_SYSTEMS_HPP
#define MEQ_SYSTEMS_HPP

#include <meq/sequences.hpp>
#include <meq/state_space.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace meq {

/// Arc distance on the circle R/Z.
inline double circle_distance(double a, double b) noexcept
{
    const double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
}

inline double reduce_mod1(double x) noexcept
{
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
}

/**
 * One-dimensional system on the circle [0,1) or on an interval [lo,hi],
 * driven by a scalar map. Distance traces run on plain doubles.
 */
class scalar_map_system : public dynamical_system
{
public:
    /// Circle variant.
    explicit scalar_map_system(std::string id)
        : dynamical_system(std::move(id), space_kind::torus, 0.5), circle_(true), lo_(0.0), hi_(1.0)
    {
    }

    /// Interval [lo, hi] with the metric |a - b|.
    scalar_map_system(std::string id, double lo, double hi)
        : dynamical_system(std::move(id), space_kind::interval, hi - lo), circle_(false), lo_(lo), hi_(hi)
    {
    }

    virtual double map(double x) const = 0;

    bool is_circle() const noexcept { return circle_; }
    double lower() const noexcept { return lo_; }
    double upper() const noexcept { return hi_; }

    double metric(double a, double b) const noexcept { return circle_ ? circle_distance(a, b) : std::abs(a - b); }

    capabilities caps() const override { return {true, true, true, false}; }

    bool contains(const point& p) const override
    {
        if (!p.holds<real_point>()) {
            return false;
        }
        const auto& c = p.as<real_point>().coords;
        if (c.size() != 1) {
            return false;
        }
        return circle_ ? (c[0] >= 0.0 && c[0] < 1.0) : (c[0] >= lo_ && c[0] <= hi_);
    }

    double distance(const point& a, const point& b) const override
    {
        return metric(a.as<real_point>().coords.at(0), b.as<real_point>().coords.at(0));
    }

    point step(const point& p) const override { return make_real(map(p.as<real_point>().coords.at(0))); }

    void distance_trace(const point& x, const point& y, std::span<double> out) const override
    {
        double a = x.as<real_point>().coords.at(0);
        double b = y.as<real_point>().coords.at(0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = metric(a, b);
            a = map(a);
            b = map(b);
        }
    }

    double resolution() const override { return 64.0 * std::numeric_limits<double>::epsilon(); }

    point sample_point(rng_t& rng) const override
    {
        return make_real(circle_ ? uniform01(rng) : lo_ + (hi_ - lo_) * uniform01(rng));
    }

    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        const double x = p.as<real_point>().coords.at(0);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            double y = x + uniform_symmetric(rng, radius);
            if (circle_) {
                y = reduce_mod1(y);
            } else if (y < lo_ || y > hi_) {
                continue;
            }
            if (metric(x, y) < radius) {
                return make_real(y);
            }
        }
        return p;
    }

private:
    bool circle_;
    double lo_;
    double hi_;
};

/// x ↦ x + α mod 1.
class circle_rotation final : public scalar_map_system
{
public:
    circle_rotation(std::string id, double alpha) : scalar_map_system(std::move(id)), alpha_(reduce_mod1(alpha)) {}

    double alpha() const noexcept { return alpha_; }

    double map(double x) const override
    {
        x += alpha_;
        return x >= 1.0 ? x - 1.0 : x;
    }

    point advance(const point& p, std::uint64_t n) const override
    {
        // repeated single steps keep the same rounding as the traces
        double x = p.as<real_point>().coords.at(0);
        for (std::uint64_t i = 0; i < n; ++i) {
            x = map(x);
        }
        return make_real(x);
    }

    bool is_isometry() const override { return true; }

private:
    double alpha_;
};

/// x ↦ 2x mod 1 in double precision. Exact per step, but a double carries only 53 bits,
/// so orbits of decoded generic points are trustworthy only up to a finite horizon.
class doubling_map final : public scalar_map_system
{
public:
    explicit doubling_map(std::string id) : scalar_map_system(std::move(id)) {}

    double map(double x) const override
    {
        x *= 2.0;
        return x >= 1.0 ? x - 1.0 : x;
    }
};

/// x ↦ x² on [0, upper].
class squaring_map final : public scalar_map_system
{
public:
    squaring_map(std::string id, double upper) : scalar_map_system(std::move(id), 0.0, upper) {}

    double map(double x) const override { return x * x; }
};

/**
 * Shift σ on a one-sided sequence space with d(x,y) = 2^{-k}, k the first index where
 * x and y differ (0 if they agree on the first `depth` symbols).
 */
class shift_system : public dynamical_system
{
public:
    static constexpr std::size_t default_depth = 60;

    shift_system(std::string id, unsigned alphabet, std::size_t depth = default_depth)
        : dynamical_system(std::move(id), space_kind::symbolic, 1.0), alphabet_(alphabet), depth_(depth)
    {
        if (depth_ == 0 || depth_ > 1000) {
            throw std::invalid_argument("shift_system: metric depth out of range");
        }
    }

    unsigned alphabet() const noexcept { return alphabet_; }
    std::size_t depth() const noexcept { return depth_; }

    bool contains(const point& p) const override
    {
        return p.holds<symbolic_point>() && p.as<symbolic_point>().alphabet() == alphabet_;
    }

    double distance(const point& a, const point& b) const override
    {
        const auto& x = a.as<symbolic_point>();
        const auto& y = b.as<symbolic_point>();
        for (std::size_t k = 0; k < depth_; ++k) {
            if (x[k] != y[k]) {
                return std::ldexp(1.0, -static_cast<int>(k));
            }
        }
        return 0.0;
    }

    point step(const point& p) const override
    {
        const auto& x = p.as<symbolic_point>();
        return symbolic_point{x.sequence, x.offset + 1};
    }

    point advance(const point& p, std::uint64_t n) const override
    {
        const auto& x = p.as<symbolic_point>();
        return symbolic_point{x.sequence, x.offset + n};
    }

    /// Linear-time trace: d(σ^i x, σ^i y) = 2^{-(m(i) - i)} with m(i) the next mismatch at or after i.
    void distance_trace(const point& xp, const point& yp, std::span<double> out) const override
    {
        const auto& x = xp.as<symbolic_point>();
        const auto& y = yp.as<symbolic_point>();
        const std::size_t n = out.size();
        const std::size_t len = n + depth_;
        std::vector<symbol_t> a(len);
        std::vector<symbol_t> b(len);
        x.read(0, a);
        y.read(0, b);
        std::size_t next = len; // sentinel: no mismatch seen
        for (std::size_t j = len; j-- > 0;) {
            if (a[j] != b[j]) {
                next = j;
            }
            if (j < n) {
                const std::size_t gap = next - j;
                out[j] = gap < depth_ ? std::ldexp(1.0, -static_cast<int>(gap)) : 0.0;
            }
        }
    }

    double resolution() const override { return std::ldexp(1.0, -static_cast<int>(depth_)); }

    /// Number of leading symbols two points must share for d < radius.
    std::size_t prefix_for_radius(double radius) const
    {
        if (!(radius > 0.0)) {
            throw std::invalid_argument("shift_system: radius must be positive");
        }
        if (radius > 1.0) {
            return 0;
        }
        const auto k = static_cast<std::size_t>(std::floor(-std::log2(radius))) + 1;
        return std::min(k, depth_);
    }

private:
    unsigned alphabet_;
    std::size_t depth_;
};

/// Full shift on A symbols. Generic points come from a counter hash.
class full_shift final : public shift_system
{
public:
    full_shift(std::string id, unsigned alphabet = 2, std::size_t depth = default_depth)
        : shift_system(std::move(id), alphabet, depth)
    {
    }

    capabilities caps() const override { return {true, true, true, true}; }

    point sample_point(rng_t& rng) const override
    {
        return make_symbolic(std::make_shared<hashed_sequence>(rng(), alphabet()));
    }

    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        const std::size_t k = prefix_for_radius(radius);
        return splice(p, k, sample_point(rng));
    }

    point splice(const point& head, std::size_t length, const point& tail) const override
    {
        const auto& h = head.as<symbolic_point>();
        const auto& t = tail.as<symbolic_point>();
        std::vector<symbol_t> w(length);
        h.read(0, w);
        return make_symbolic(std::make_shared<spliced_sequence>(std::move(w), t.sequence, t.offset));
    }
};

/**
 * Sturmian subshift: codings of the rotation by α with partition [0,1-α), [1-α,1).
 * Points are orbit codings of rotation points θ (the closure adds only countably many
 * boundary codings, which sampling never produces).
 */
class sturmian_shift final : public shift_system
{
public:
    sturmian_shift(std::string id, long double alpha, std::size_t depth = default_depth)
        : shift_system(std::move(id), 2, depth), alpha_(to_fixed64(alpha))
    {
    }

    std::uint64_t alpha_fixed() const noexcept { return alpha_; }

    capabilities caps() const override { return {true, true, true, false}; }

    bool contains(const point& p) const override
    {
        return p.holds<symbolic_point>()
            && dynamic_cast<const sturmian_sequence*>(p.as<symbolic_point>().sequence.get()) != nullptr;
    }

    point coding_of(std::uint64_t theta_fixed) const
    {
        return make_symbolic(std::make_shared<sturmian_sequence>(alpha_, theta_fixed));
    }

    point coding_of(long double theta) const { return coding_of(to_fixed64(theta)); }

    /// Rotation point θ + offset·α coded by `p`.
    std::uint64_t rotation_point(const point& p) const
    {
        const auto& s = p.as<symbolic_point>();
        return static_cast<const sturmian_sequence&>(*s.sequence).rotation_point(s.offset);
    }

    point sample_point(rng_t& rng) const override { return coding_of(static_cast<std::uint64_t>(rng())); }

    /// Perturbs the underlying rotation point, shrinking the perturbation until the
    /// codings share the prefix needed for d < radius.
    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        const std::size_t k = prefix_for_radius(radius);
        const std::uint64_t theta = rotation_point(p);
        const auto& src = p.as<symbolic_point>();
        double scale = 0.5;
        for (int attempt = 0; attempt < 4000; ++attempt) {
            const double u = uniform_symmetric(rng, scale);
            const auto delta = static_cast<std::int64_t>(std::ldexp(u, 63)) * 2;
            const std::uint64_t candidate = theta + static_cast<std::uint64_t>(delta);
            point q = coding_of(candidate);
            const auto& qs = q.as<symbolic_point>();
            bool agree = true;
            for (std::size_t i = 0; i < k && agree; ++i) {
                agree = qs[i] == src[i];
            }
            if (agree) {
                return q;
            }
            if (attempt % 4 == 3) {
                scale *= 0.5;
            }
        }
        return p;
    }

private:
    std::uint64_t alpha_;
};

/// Orbit of the Thue–Morse sequence under the shift; points are (t, offset).
class thue_morse_shift final : public shift_system
{
public:
    explicit thue_morse_shift(std::string id, std::size_t depth = default_depth)
        : shift_system(std::move(id), 2, depth), sequence_(std::make_shared<thue_morse_sequence>())
    {
    }

    capabilities caps() const override { return {true, true, true, false}; }

    bool contains(const point& p) const override
    {
        return p.holds<symbolic_point>() && p.as<symbolic_point>().sequence == sequence_;
    }

    point at_offset(std::uint64_t n) const { return make_symbolic(sequence_, n); }

    point sample_point(rng_t& rng) const override { return at_offset(rng() >> 24); }

    /// Another orbit point sharing the required prefix: one of the next few recurrences of the word.
    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        const std::size_t k = prefix_for_radius(radius);
        const auto& src = p.as<symbolic_point>();
        std::vector<symbol_t> word(k);
        src.read(0, word);
        const std::uint64_t skip = uniform_index(rng, 4);
        std::uint64_t found = 0;
        std::vector<symbol_t> window(k);
        for (std::uint64_t m = src.offset + 1; m < src.offset + (std::uint64_t{1} << 22); ++m) {
            sequence_->read(m, window);
            if (window == word) {
                if (found == skip) {
                    return at_offset(m);
                }
                ++found;
            }
        }
        return p;
    }

private:
    sequence_ptr sequence_;
};

/**
 * Doubling map coded by binary expansions: the shift on {0,1}^N with the circle metric
 * of the decoded values Σ b_k 2^{-(k+1)} (first 64 bits). Orbits are exact at any horizon.
 */
class binary_doubling_system final : public dynamical_system
{
public:
    explicit binary_doubling_system(std::string id) : dynamical_system(std::move(id), space_kind::symbolic, 0.5) {}

    capabilities caps() const override { return {true, true, true, true}; }

    bool contains(const point& p) const override
    {
        return p.holds<symbolic_point>() && p.as<symbolic_point>().alphabet() == 2;
    }

    static std::uint64_t window64(const symbolic_point& x, std::uint64_t start)
    {
        std::array<symbol_t, 64> bits{};
        x.read(start, bits);
        std::uint64_t w = 0;
        for (auto b : bits) {
            w = (w << 1) | b;
        }
        return w;
    }

    /// Decoded value in [0,1).
    static double decode(const point& p)
    {
        return static_cast<double>(from_fixed64(window64(p.as<symbolic_point>(), 0)));
    }

    /// Binary expansion of a double in [0,1) (finite, followed by zeros).
    static point encode(double x)
    {
        x = reduce_mod1(x);
        std::vector<symbol_t> bits;
        for (int k = 0; k < 64 && x > 0.0; ++k) {
            x *= 2.0;
            const symbol_t b = x >= 1.0 ? 1 : 0;
            bits.push_back(b);
            x -= b;
        }
        return make_symbolic(std::make_shared<word_sequence>(std::move(bits), std::vector<symbol_t>{0}));
    }

    static double fixed_circle_distance(std::uint64_t a, std::uint64_t b)
    {
        const std::uint64_t d = a - b;
        const std::uint64_t e = b - a;
        return static_cast<double>(from_fixed64(std::min(d, e)));
    }

    double distance(const point& a, const point& b) const override
    {
        return fixed_circle_distance(window64(a.as<symbolic_point>(), 0), window64(b.as<symbolic_point>(), 0));
    }

    point step(const point& p) const override
    {
        const auto& x = p.as<symbolic_point>();
        return symbolic_point{x.sequence, x.offset + 1};
    }

    point advance(const point& p, std::uint64_t n) const override
    {
        const auto& x = p.as<symbolic_point>();
        return symbolic_point{x.sequence, x.offset + n};
    }

    void distance_trace(const point& xp, const point& yp, std::span<double> out) const override
    {
        const auto& x = xp.as<symbolic_point>();
        const auto& y = yp.as<symbolic_point>();
        const std::size_t n = out.size();
        std::vector<symbol_t> a(n + 64);
        std::vector<symbol_t> b(n + 64);
        x.read(0, a);
        y.read(0, b);
        std::uint64_t wa = 0;
        std::uint64_t wb = 0;
        for (std::size_t k = 0; k < 64; ++k) {
            wa = (wa << 1) | a[k];
            wb = (wb << 1) | b[k];
        }
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = fixed_circle_distance(wa, wb);
            wa = (wa << 1) | a[i + 64];
            wb = (wb << 1) | b[i + 64];
        }
    }

    double resolution() const override { return std::ldexp(1.0, -60); }

    point sample_point(rng_t& rng) const override { return make_symbolic(std::make_shared<hashed_sequence>(rng(), 2)); }

    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        if (!(radius > 0.0)) {
            throw std::invalid_argument("binary_doubling_system: radius must be positive");
        }
        // sharing k leading bits puts the decoded values within 2^{-k}
        const std::size_t k = radius >= 1.0 ? 0 : std::min<std::size_t>(60, static_cast<std::size_t>(std::ceil(-std::log2(radius))) + 1);
        return splice(p, k, sample_point(rng));
    }

    point splice(const point& head, std::size_t length, const point& tail) const override
    {
        const auto& h = head.as<symbolic_point>();
        const auto& t = tail.as<symbolic_point>();
        std::vector<symbol_t> w(length);
        h.read(0, w);
        return make_symbolic(std::make_shared<spliced_sequence>(std::move(w), t.sequence, t.offset));
    }
};

/// Finite metric space given by an explicit distance matrix, with a self-map.
class finite_system final : public dynamical_system
{
public:
    finite_system(std::string id, std::vector<std::vector<double>> dist, std::vector<std::size_t> next, bool isometry)
        : dynamical_system(std::move(id), space_kind::finite, max_entry(dist))
        , dist_(std::move(dist))
        , next_(std::move(next))
        , isometry_(isometry)
    {
        const std::size_t n = dist_.size();
        if (n == 0 || next_.size() != n) {
            throw std::invalid_argument("finite_system: map and matrix sizes disagree");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (dist_[i].size() != n || dist_[i][i] != 0.0 || next_[i] >= n) {
                throw std::invalid_argument("finite_system: malformed distance matrix or map");
            }
        }
    }

    std::size_t size() const noexcept { return dist_.size(); }

    capabilities caps() const override { return {true, true, true, false}; }

    bool contains(const point& p) const override
    {
        return p.holds<finite_point>() && p.as<finite_point>().id < dist_.size();
    }

    double distance(const point& a, const point& b) const override
    {
        return dist_.at(a.as<finite_point>().id).at(b.as<finite_point>().id);
    }

    point step(const point& p) const override { return make_finite(next_.at(p.as<finite_point>().id)); }

    bool is_isometry() const override { return isometry_; }

    point sample_point(rng_t& rng) const override { return make_finite(uniform_index(rng, dist_.size())); }

    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        const std::size_t x = p.as<finite_point>().id;
        std::vector<std::size_t> ball;
        for (std::size_t j = 0; j < dist_.size(); ++j) {
            if (dist_[x][j] < radius) {
                ball.push_back(j);
            }
        }
        return make_finite(ball[uniform_index(rng, ball.size())]);
    }

private:
    static double max_entry(const std::vector<std::vector<double>>& m)
    {
        double v = 0.0;
        for (const auto& row : m) {
            for (double d : row) {
                v = std::max(v, d);
            }
        }
        return v;
    }

    std::vector<std::vector<double>> dist_;
    std::vector<std::size_t> next_;
    bool isometry_;
};

/// (X_1 × ... × X_k, T_1 × ... × T_k) with the max metric.
class product_system final : public dynamical_system
{
public:
    product_system(std::string id, std::vector<system_ptr> factors)
        : dynamical_system(std::move(id), space_kind::product, max_diameter(factors)), factors_(std::move(factors))
    {
        if (factors_.size() < 2) {
            throw std::invalid_argument("product_system: need at least two factors");
        }
    }

    const std::vector<system_ptr>& factors() const noexcept { return factors_; }

    capabilities caps() const override
    {
        capabilities c{true, true, true, false};
        for (const auto& f : factors_) {
            const auto fc = f->caps();
            c.can_sample_points = c.can_sample_points && fc.can_sample_points;
            c.can_sample_near = c.can_sample_near && fc.can_sample_near;
            c.has_known_classification = c.has_known_classification && fc.has_known_classification;
        }
        return c;
    }

    bool contains(const point& p) const override
    {
        if (!p.holds<product_point>()) {
            return false;
        }
        const auto& parts = p.as<product_point>().parts;
        if (parts.size() != factors_.size()) {
            return false;
        }
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (!factors_[k]->contains(parts[k])) {
                return false;
            }
        }
        return true;
    }

    double distance(const point& a, const point& b) const override
    {
        const auto& pa = a.as<product_point>().parts;
        const auto& pb = b.as<product_point>().parts;
        double d = 0.0;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            d = std::max(d, factors_[k]->distance(pa.at(k), pb.at(k)));
        }
        return d;
    }

    point step(const point& p) const override
    {
        const auto& parts = p.as<product_point>().parts;
        std::vector<point> next;
        next.reserve(parts.size());
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            next.push_back(factors_[k]->step(parts.at(k)));
        }
        return make_product(std::move(next));
    }

    point advance(const point& p, std::uint64_t n) const override
    {
        const auto& parts = p.as<product_point>().parts;
        std::vector<point> next;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            next.push_back(factors_[k]->advance(parts.at(k), n));
        }
        return make_product(std::move(next));
    }

    void distance_trace(const point& x, const point& y, std::span<double> out) const override
    {
        const auto& px = x.as<product_point>().parts;
        const auto& py = y.as<product_point>().parts;
        std::fill(out.begin(), out.end(), 0.0);
        std::vector<double> tmp(out.size());
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            factors_[k]->distance_trace(px.at(k), py.at(k), tmp);
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = std::max(out[i], tmp[i]);
            }
        }
    }

    double resolution() const override
    {
        double r = 0.0;
        for (const auto& f : factors_) {
            r = std::max(r, f->resolution());
        }
        return r;
    }

    bool is_isometry() const override
    {
        return std::all_of(factors_.begin(), factors_.end(), [](const system_ptr& f) { return f->is_isometry(); });
    }

    bool is_symbolic_like() const override
    {
        return std::any_of(factors_.begin(), factors_.end(), [](const system_ptr& f) { return f->is_symbolic_like(); });
    }

    point sample_point(rng_t& rng) const override
    {
        std::vector<point> parts;
        for (const auto& f : factors_) {
            parts.push_back(f->sample_point(rng));
        }
        return make_product(std::move(parts));
    }

    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        const auto& parts = p.as<product_point>().parts;
        std::vector<point> near;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            near.push_back(factors_[k]->sample_near(parts.at(k), radius, rng));
        }
        return make_product(std::move(near));
    }

private:
    static double max_diameter(const std::vector<system_ptr>& fs)
    {
        double d = 0.0;
        for (const auto& f : fs) {
            if (!f) {
                throw std::invalid_argument("product_system: null factor");
            }
            d = std::max(d, f->diameter_bound());
        }
        return d;
    }

    std::vector<system_ptr> factors_;
};

/// Same dynamics with the metric multiplied by a positive constant.
class scaled_metric_system final : public dynamical_system
{
public:
    scaled_metric_system(std::string id, system_ptr inner, double factor)
        : dynamical_system(std::move(id), inner->kind(), inner->diameter_bound() * factor)
        , inner_(std::move(inner))
        , factor_(factor)
    {
        if (!(factor_ > 0.0)) {
            throw std::invalid_argument("scaled_metric_system: factor must be positive");
        }
    }

    const system_ptr& inner() const noexcept { return inner_; }
    double factor() const noexcept { return factor_; }

    capabilities caps() const override { return inner_->caps(); }
    bool contains(const point& p) const override { return inner_->contains(p); }
    double distance(const point& a, const point& b) const override { return factor_ * inner_->distance(a, b); }
    point step(const point& p) const override { return inner_->step(p); }
    point advance(const point& p, std::uint64_t n) const override { return inner_->advance(p, n); }

    void distance_trace(const point& x, const point& y, std::span<double> out) const override
    {
        inner_->distance_trace(x, y, out);
        for (auto& v : out) {
            v *= factor_;
        }
    }

    double resolution() const override { return factor_ * inner_->resolution(); }
    bool is_isometry() const override { return inner_->is_isometry(); }
    bool is_symbolic_like() const override { return inner_->is_symbolic_like(); }
    point sample_point(rng_t& rng) const override { return inner_->sample_point(rng); }

    point sample_near(const point& p, double radius, rng_t& rng) const override
    {
        return inner_->sample_near(p, radius / factor_, rng);
    }

    point splice(const point& head, std::size_t length, const point& tail) const override
    {
        return inner_->splice(head, length, tail);
    }

private:
    system_ptr inner_;
    double factor_;
};

} // namespace meq

#endif
