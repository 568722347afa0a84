#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "foliage/errors.hpp"

namespace foliage {

/// Closed interval [lo, hi] used as an outer enclosure in box arithmetic.
/// Boxes below are open; the enclosure of an open set is still sound.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h) : lo(l), hi(h) {}
    static Interval point(double v) { return {v, v}; }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains_open(double x) const { return lo < x && x < hi; }
    /// True when this enclosure sits inside [o.lo, o.hi].
    bool subset_of(const Interval& o) const { return o.lo <= lo && hi <= o.hi; }
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline Interval operator*(Interval a, Interval b) {
    const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}

/// Raised (internally) when an interval operation is not defined on the
/// whole input box, e.g. dividing by an interval straddling zero.
struct IntervalUndefined : Error {
    explicit IntervalUndefined(const std::string& w) : Error(w) {}
};

inline Interval operator/(Interval a, Interval b) {
    if (b.lo <= 0.0 && 0.0 <= b.hi)
        throw IntervalUndefined("interval division by an interval containing zero");
    return a * Interval{1.0 / b.hi, 1.0 / b.lo};
}

inline Interval pow_int(Interval a, int n) {
    if (n == 0) return Interval::point(1.0);
    if (n < 0) return Interval::point(1.0) / pow_int(a, -n);
    const double plo = std::pow(a.lo, n), phi = std::pow(a.hi, n);
    if (n % 2 == 1) return {plo, phi};
    // even power: minimum at zero when the interval straddles it
    if (a.lo <= 0.0 && 0.0 <= a.hi) return {0.0, std::max(plo, phi)};
    return {std::min(plo, phi), std::max(plo, phi)};
}

inline Interval exp(Interval a) { return {std::exp(a.lo), std::exp(a.hi)}; }

inline Interval sqrt(Interval a) {
    if (a.lo < 0.0) throw IntervalUndefined("sqrt of an interval reaching below zero");
    return {std::sqrt(a.lo), std::sqrt(a.hi)};
}

namespace detail {
// Outward padding for transcendental enclosures (argument reduction slop).
inline constexpr double kTrigPad = 1e-14;
}  // namespace detail

inline Interval sin(Interval a) {
    constexpr double two_pi = 2.0 * M_PI;
    if (a.width() >= two_pi) return {-1.0, 1.0};
    double lo = std::min(std::sin(a.lo), std::sin(a.hi));
    double hi = std::max(std::sin(a.lo), std::sin(a.hi));
    // maxima at pi/2 + 2k*pi, minima at -pi/2 + 2k*pi
    const double kmax = std::ceil((a.lo - M_PI_2) / two_pi);
    if (M_PI_2 + kmax * two_pi <= a.hi) hi = 1.0;
    const double kmin = std::ceil((a.lo + M_PI_2) / two_pi);
    if (-M_PI_2 + kmin * two_pi <= a.hi) lo = -1.0;
    return {std::max(-1.0, lo - detail::kTrigPad), std::min(1.0, hi + detail::kTrigPad)};
}

inline Interval cos(Interval a) { return sin(a + Interval::point(M_PI_2)); }

/// Axis-aligned open box in R^q: the coordinate cubes and chart domains
/// everything in this library lives on.
struct Box {
    std::vector<Interval> iv;

    Box() = default;
    explicit Box(std::vector<Interval> intervals) : iv(std::move(intervals)) {}

    /// Cube (-r, r)^q.
    static Box cube(int q, double r) {
        Box b;
        b.iv.assign(static_cast<size_t>(q), Interval{-r, r});
        return b;
    }

    int dim() const { return static_cast<int>(iv.size()); }

    bool valid() const {
        if (iv.empty()) return false;
        for (const auto& i : iv)
            if (!(i.lo < i.hi)) return false;
        return true;
    }

    bool contains(const std::vector<double>& p) const {
        if (static_cast<int>(p.size()) != dim()) return false;
        for (int k = 0; k < dim(); ++k)
            if (!iv[k].contains_open(p[k])) return false;
        return true;
    }

    /// Open-subset test: every point of *this is a point of o.
    bool subset_of(const Box& o) const {
        if (o.dim() != dim()) return false;
        for (int k = 0; k < dim(); ++k)
            if (!iv[k].subset_of(o.iv[k])) return false;
        return true;
    }

    /// Closure of *this contained in the open box o (strict endpoint inequalities).
    bool strictly_inside(const Box& o) const {
        if (o.dim() != dim()) return false;
        for (int k = 0; k < dim(); ++k)
            if (!(o.iv[k].lo < iv[k].lo && iv[k].hi < o.iv[k].hi)) return false;
        return true;
    }

    bool operator==(const Box& o) const {
        if (o.dim() != dim()) return false;
        for (int k = 0; k < dim(); ++k)
            if (iv[k].lo != o.iv[k].lo || iv[k].hi != o.iv[k].hi) return false;
        return true;
    }

    std::vector<double> center() const {
        std::vector<double> c(iv.size());
        for (size_t k = 0; k < iv.size(); ++k) c[k] = iv[k].mid();
        return c;
    }

    /// Box shrunk by margin on every side; may become invalid.
    Box shrunk(double margin) const {
        Box b = *this;
        for (auto& i : b.iv) {
            i.lo += margin;
            i.hi -= margin;
        }
        return b;
    }

    Box scaled_about_center(double t) const {
        Box b = *this;
        for (auto& i : b.iv) {
            const double c = i.mid(), h = 0.5 * i.width() * t;
            i.lo = c - h;
            i.hi = c + h;
        }
        return b;
    }

    Box translated(const std::vector<double>& v) const {
        Box b = *this;
        for (int k = 0; k < dim(); ++k) {
            b.iv[k].lo += v[k];
            b.iv[k].hi += v[k];
        }
        return b;
    }
};

inline std::optional<Box> intersect(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) return std::nullopt;
    Box r = a;
    for (int k = 0; k < a.dim(); ++k) {
        r.iv[k].lo = std::max(a.iv[k].lo, b.iv[k].lo);
        r.iv[k].hi = std::min(a.iv[k].hi, b.iv[k].hi);
        if (!(r.iv[k].lo < r.iv[k].hi)) return std::nullopt;
    }
    return r;
}

/// Uniform interior grid: n points per axis, excluding the (open) boundary.
/// Points come out in lexicographic order, which callers rely on for
/// deterministic first-witness reporting.
inline std::vector<std::vector<double>> interior_grid(const Box& box, int n) {
    const int q = box.dim();
    std::vector<std::vector<double>> pts;
    std::vector<int> idx(static_cast<size_t>(q), 0);
    const auto coord = [&](int k, int i) {
        const auto& iv = box.iv[static_cast<size_t>(k)];
        return iv.lo + (i + 1) * iv.width() / (n + 1);
    };
    while (true) {
        std::vector<double> p(static_cast<size_t>(q));
        for (int k = 0; k < q; ++k) p[static_cast<size_t>(k)] = coord(k, idx[static_cast<size_t>(k)]);
        pts.push_back(std::move(p));
        int k = q - 1;
        while (k >= 0 && ++idx[static_cast<size_t>(k)] == n) {
            idx[static_cast<size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return pts;
}

}  // namespace foliage
