#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/expression.hpp"
#include "foliage/interval.hpp"
#include "foliage/linalg.hpp"
#include "foliage/tolerances.hpp"

namespace foliage {

// ===================================================================
// LocalMap: a partial diffeomorphism between open boxes, given by
// analytic forward/inverse component expressions. Every map this
// library works with (translations, rotations, holonomy cocycles,
// their words) has a closed-form inverse, so maps carry the inverse
// declared rather than inverting numerically.
// ===================================================================

class LocalMap {
public:
    Box dom, codom;
    std::vector<Expression> fwd, inv;
    std::string chart_src, chart_dst;

    LocalMap() = default;

    /// Validating constructor: checks (on sampled points of dom) that
    /// forward lands in codom, that the declared inverse undoes forward
    /// within tol::inverse, and that the Jacobian determinant is nonzero.
    static LocalMap make(Box dom, Box codom, std::vector<Expression> fwd,
                         std::vector<Expression> inv, std::string chart_src,
                         std::string chart_dst, int rng_samples = 8, unsigned seed = 42) {
        LocalMap h;
        h.dom = std::move(dom);
        h.codom = std::move(codom);
        h.fwd = std::move(fwd);
        h.inv = std::move(inv);
        h.chart_src = std::move(chart_src);
        h.chart_dst = std::move(chart_dst);
        h.finish();
        h.validate(rng_samples, seed);
        return h;
    }

    int dim() const { return dom.dim(); }

    bool contains(const Vector& y) const { return dom.contains(to_std(y)); }

    Vector apply(const Vector& y) const {
        if (!contains(y)) throw DomainError("point outside the domain of the map");
        return apply_unchecked(y);
    }

    Vector apply_unchecked(const Vector& y) const {
        Vector r(dim());
        for (int k = 0; k < dim(); ++k) r(k) = eval(fwd[static_cast<size_t>(k)], y);
        return r;
    }

    Vector apply_inverse(const Vector& y) const {
        Vector r(dim());
        for (int k = 0; k < dim(); ++k) r(k) = eval(inv[static_cast<size_t>(k)], y);
        return r;
    }

    /// Jacobian matrix of the forward components at y (no domain check).
    Matrix jacobian_unchecked(const Vector& y) const {
        const int q = dim();
        Matrix j(q, q);
        for (int k = 0; k < q; ++k)
            for (int l = 0; l < q; ++l) j(k, l) = eval(jac_[static_cast<size_t>(k * q + l)], y);
        return j;
    }

    const Expression& jacobian_entry(int k, int l) const {
        return jac_[static_cast<size_t>(k * dim() + l)];
    }

    /// The same diffeomorphism run backwards.
    LocalMap inverse_map() const {
        LocalMap h;
        h.dom = codom;
        h.codom = dom;
        h.fwd = inv;
        h.inv = fwd;
        h.chart_src = chart_dst;
        h.chart_dst = chart_src;
        h.finish();
        return h;
    }

    /// Internal constructor without sampling validation; composition uses
    /// it because the composite inherits its contract from the factors.
    static LocalMap make_unvalidated(Box dom, Box codom, std::vector<Expression> fwd,
                                     std::vector<Expression> inv, std::string chart_src,
                                     std::string chart_dst) {
        LocalMap h;
        h.dom = std::move(dom);
        h.codom = std::move(codom);
        h.fwd = std::move(fwd);
        h.inv = std::move(inv);
        h.chart_src = std::move(chart_src);
        h.chart_dst = std::move(chart_dst);
        h.finish();
        return h;
    }

private:
    std::vector<Expression> jac_;  // row-major d fwd_k / d y_l

    void finish() {
        const int q = dim();
        if (static_cast<int>(fwd.size()) != q || static_cast<int>(inv.size()) != q ||
            codom.dim() != q)
            throw InvalidGenerator("map components and boxes disagree in dimension");
        jac_.clear();
        jac_.reserve(static_cast<size_t>(q * q));
        for (int k = 0; k < q; ++k)
            for (int l = 0; l < q; ++l) jac_.push_back(diff(fwd[static_cast<size_t>(k)], l));
    }

    void validate(int rng_samples, unsigned seed) const {
        std::vector<Vector> pts;
        pts.push_back(to_vector(dom.center()));
        for (const auto& p : interior_grid(dom, 2)) pts.push_back(to_vector(p));
        std::mt19937 rng(seed);
        for (int i = 0; i < rng_samples; ++i) {
            Vector p(dim());
            for (int k = 0; k < dim(); ++k) {
                const auto& iv = dom.iv[static_cast<size_t>(k)];
                std::uniform_real_distribution<double> u(iv.lo, iv.hi);
                p(k) = u(rng);
            }
            pts.push_back(p);
        }
        for (const auto& p : pts) {
            const Vector f = apply_unchecked(p);
            for (int k = 0; k < dim(); ++k) {
                const auto& iv = codom.iv[static_cast<size_t>(k)];
                if (f(k) < iv.lo - 1e-12 || f(k) > iv.hi + 1e-12)
                    throw InvalidGenerator("forward image leaves the declared codomain");
            }
            const Vector back = apply_inverse(f);
            if ((back - p).cwiseAbs().maxCoeff() > tol::inverse)
                throw InvalidGenerator("declared inverse fails the round-trip contract");
            if (std::abs(jacobian_unchecked(p).determinant()) < 1e-14)
                throw InvalidGenerator("Jacobian determinant vanishes on the domain");
        }
    }
};

/// Jacobian at a point of the domain.
inline Matrix jacobian(const LocalMap& h, const Vector& y) {
    if (!h.contains(y)) throw DomainError("jacobian requested outside the domain");
    return h.jacobian_unchecked(y);
}

// --- stock maps -----------------------------------------------------

inline LocalMap identity_map(const Box& box, const std::string& chart) {
    std::vector<Expression> id;
    for (int k = 0; k < box.dim(); ++k) id.push_back(coord(k));
    return LocalMap::make_unvalidated(box, box, id, id, chart, chart);
}

inline LocalMap translation_map(const Box& dom, const Vector& offset, const std::string& src,
                                const std::string& dst) {
    std::vector<Expression> f, g;
    for (int k = 0; k < dom.dim(); ++k) {
        f.push_back(coord(k) + offset(k));
        g.push_back(coord(k) - offset(k));
    }
    return LocalMap::make_unvalidated(dom, dom.translated(to_std(offset)), f, g, src, dst);
}

/// Linear map y -> A y restricted to dom; codomain is the interval image.
inline LocalMap linear_map(const Box& dom, const Matrix& a, const std::string& src,
                           const std::string& dst) {
    if (std::abs(a.determinant()) < 1e-14) throw InvalidGenerator("linear map is singular");
    const Matrix ainv = a.inverse();
    const int q = dom.dim();
    std::vector<Expression> f, g;
    for (int k = 0; k < q; ++k) {
        Expression fk = lit(0.0), gk = lit(0.0);
        for (int l = 0; l < q; ++l) {
            fk = fk + lit(a(k, l)) * coord(l);
            gk = gk + lit(ainv(k, l)) * coord(l);
        }
        f.push_back(simplify(fk));
        g.push_back(simplify(gk));
    }
    Box codom = dom;
    for (int k = 0; k < q; ++k) {
        Interval image{0.0, 0.0};
        for (int l = 0; l < q; ++l) image = image + Interval::point(a(k, l)) * dom.iv[static_cast<size_t>(l)];
        codom.iv[static_cast<size_t>(k)] = image;
    }
    return LocalMap::make(dom, codom, f, g, src, dst);
}

// --- composition ------------------------------------------------------

namespace detail {

/// Outer enclosure of the image of a box under the map's components;
/// nullopt when interval arithmetic cannot evaluate on the whole box.
inline std::optional<Box> interval_image(const std::vector<Expression>& comps, const Box& b) {
    Box img = b;
    try {
        for (size_t k = 0; k < comps.size(); ++k) img.iv[k] = eval_interval(comps[k], b);
    } catch (const IntervalUndefined&) {
        return std::nullopt;
    }
    return img;
}

inline bool image_inside(const std::vector<Expression>& comps, const Box& b, const Box& target) {
    const auto img = interval_image(comps, b);
    if (!img) return false;
    for (int k = 0; k < b.dim(); ++k)
        if (img->iv[static_cast<size_t>(k)].lo < target.iv[static_cast<size_t>(k)].lo ||
            img->iv[static_cast<size_t>(k)].hi > target.iv[static_cast<size_t>(k)].hi)
            return false;
    return true;
}

}  // namespace detail

/// Composition h2 o h1 on the domain dom(h1) n h1^{-1}(dom h2).
///
/// The preimage is intersected as an axis-aligned box certified by
/// interval arithmetic: starting from the enclosure of the inverse image,
/// the box is shrunk about its center until the forward interval image
/// provably stays inside dom(h2). Points outside the certified box count
/// as outside the composite domain. For translations (and any map whose
/// components are exact in interval arithmetic) no shrinking happens and
/// the domain is the exact intersection dom(h1) n h1^{-1}(dom h2).
inline LocalMap compose_maps(const LocalMap& h2, const LocalMap& h1) {
    if (h1.chart_dst != h2.chart_src)
        throw ChartMismatch("compose: h1 maps into chart '" + h1.chart_dst +
                            "' but h2 starts from chart '" + h2.chart_src + "'");
    const auto target = intersect(h2.dom, h1.codom);
    if (!target) throw EmptyDomain();

    std::optional<Box> b0;
    const auto pre = detail::interval_image(h1.inv, *target);
    if (pre)
        b0 = intersect(h1.dom, *pre);
    else
        b0 = h1.dom;  // unbounded enclosure: fall back to the whole domain
    if (!b0) throw EmptyDomain();

    Box certified = *b0;
    if (!detail::image_inside(h1.fwd, certified, *target)) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (detail::image_inside(h1.fwd, b0->scaled_about_center(mid), *target))
                lo = mid;
            else
                hi = mid;
        }
        if (lo == 0.0) throw EmptyDomain("no certifiable composite domain");
        certified = b0->scaled_about_center(lo);
    }
    if (!certified.valid()) throw EmptyDomain();

    std::vector<Expression> f, g;
    for (int k = 0; k < h1.dim(); ++k) {
        f.push_back(substitute(h2.fwd[static_cast<size_t>(k)], h1.fwd));
        g.push_back(substitute(h1.inv[static_cast<size_t>(k)], h2.inv));
    }

    Box codom = h2.codom;
    if (const auto img = detail::interval_image(f, certified)) {
        if (const auto clipped = intersect(*img, h2.codom)) codom = *clipped;
    }

    return LocalMap::make_unvalidated(certified, codom, std::move(f), std::move(g), h1.chart_src,
                                      h2.chart_dst);
}

}  // namespace foliage
