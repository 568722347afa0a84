#pragma once

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/expression.hpp"
#include "foliage/linalg.hpp"
#include "foliage/local_map.hpp"
#include "foliage/operator.hpp"
#include "foliage/tolerances.hpp"

namespace foliage {

// ===================================================================
// Finitely presented pseudogroups: a chart list (each relatively
// compact inside its ambient component) and generators given as
// restriction pairs (g, g_ext) with closure(dom g) inside dom(g_ext).
// Words over signed generator indices realize pseudogroup elements.
// ===================================================================

struct Chart {
    std::string id;
    Box box;      // T_i
    Box ambient;  // T_i'
};

struct Generator {
    LocalMap map;  // the generator itself
    LocalMap ext;  // extension beyond the closure of dom(map)
};

/// A word is a sequence of signed 1-based generator indices; -k denotes
/// the inverse of generator k. Realizability is validated on use.
using Word = std::vector<int>;

struct ChartPoint {
    std::string chart;
    Vector p;
};

class PseudogroupSpec {
public:
    int q = 0;
    std::vector<Chart> charts;
    std::vector<Generator> gens;

    const Chart* find_chart(const std::string& id) const {
        for (const auto& c : charts)
            if (c.id == id) return &c;
        return nullptr;
    }

    const Chart& chart(const std::string& id) const {
        const Chart* c = find_chart(id);
        if (!c) throw ChartMismatch("unknown chart '" + id + "'");
        return *c;
    }

    int n_gens() const { return static_cast<int>(gens.size()); }

    /// Generator for a signed index: +k is gens[k-1], -k its inverse.
    LocalMap signed_generator(int s) const {
        if (s == 0 || std::abs(s) > n_gens())
            throw ParameterOutOfRange("generator index out of range");
        const LocalMap& g = gens[static_cast<size_t>(std::abs(s) - 1)].map;
        return s > 0 ? g : g.inverse_map();
    }

    /// Signed indices in the deterministic exploration order
    /// +1, -1, +2, -2, ... used by every search in this module.
    std::vector<int> signed_indices() const {
        std::vector<int> idx;
        for (int k = 1; k <= n_gens(); ++k) {
            idx.push_back(k);
            idx.push_back(-k);
        }
        return idx;
    }

    /// Realized signed generators in exploration order, built once so the
    /// search loops do not re-derive symbolic Jacobians per step.
    std::vector<std::pair<int, LocalMap>> signed_generators() const {
        std::vector<std::pair<int, LocalMap>> out;
        for (int s : signed_indices()) out.emplace_back(s, signed_generator(s));
        return out;
    }
};

/// Word realization: left-to-right composition, so realize([a, b]) applies
/// a first. EmptyDomain propagates from composition.
inline LocalMap realize_word(const PseudogroupSpec& h, const Word& w) {
    if (w.empty()) throw ParameterOutOfRange("cannot realize the empty word");
    LocalMap m = h.signed_generator(w[0]);
    for (size_t i = 1; i < w.size(); ++i) m = compose_maps(h.signed_generator(w[i]), m);
    return m;
}

// --- compact generation ----------------------------------------------

struct CompactGenerationReport {
    bool ok = true;
    std::vector<std::string> failures;

    explicit operator bool() const { return ok; }
};

/// Definition check: closure(dom g) strictly inside dom(g_ext), g_ext
/// restricting to g (sampled), and each chart box strictly inside its
/// ambient component.
inline CompactGenerationReport check_compact_generation(const PseudogroupSpec& h) {
    CompactGenerationReport r;
    const auto fail = [&](const std::string& m) {
        r.ok = false;
        r.failures.push_back(m);
    };
    for (const auto& c : h.charts)
        if (!c.box.strictly_inside(c.ambient))
            fail("chart '" + c.id + "' is not relatively compact in its ambient box");
    for (size_t i = 0; i < h.gens.size(); ++i) {
        const auto& g = h.gens[i];
        const std::string label = "generator " + std::to_string(i + 1);
        if (!g.map.dom.strictly_inside(g.ext.dom)) {
            fail(label + ": closure of dom is not contained in the extension domain");
            continue;
        }
        if (g.map.chart_src != g.ext.chart_src || g.map.chart_dst != g.ext.chart_dst)
            fail(label + ": extension lives on different charts");
        for (const auto& yp : interior_grid(g.map.dom, 3)) {
            const Vector y = to_vector(yp);
            if ((g.map.apply_unchecked(y) - g.ext.apply_unchecked(y)).cwiseAbs().maxCoeff() > 1e-12) {
                fail(label + ": extension does not restrict to the generator");
                break;
            }
        }
    }
    return r;
}

// --- commuting residual ------------------------------------------------

/// Default family of test functions for the commuting check: coordinates,
/// their squares, pairwise products and sin(pi y_k). A heuristic family,
/// rich enough to separate the order-<=2 operators shipped with the
/// library; not a completeness claim.
inline std::vector<Expression> default_test_functions(int q) {
    std::vector<Expression> fs;
    for (int k = 0; k < q; ++k) fs.push_back(coord(k));
    for (int k = 0; k < q; ++k) fs.push_back(pow(coord(k), 2));
    for (int k = 0; k < q; ++k)
        for (int l = k + 1; l < q; ++l) fs.push_back(coord(k) * coord(l));
    for (int k = 0; k < q; ++k) fs.push_back(sin(lit(M_PI) * coord(k)));
    return fs;
}

/// max over f and grid points y of |(Pf)(psi(y)) - (P(f o psi))(y)|,
/// the deviation from psi^*(Pf) = P(psi^* f). P(f o psi) is symbolic.
inline double commuting_residual(const BasicOperator& p_src, const BasicOperator& p_dst,
                                 const LocalMap& psi, const std::vector<Expression>& fs,
                                 int grid_n) {
    if (fs.empty()) throw ParameterOutOfRange("commuting_residual needs at least one test function");
    double worst = 0.0;
    const auto grid = interior_grid(psi.dom, grid_n);
    for (const auto& f : fs) {
        const ComplexExpression pf = apply_operator(p_dst, f);
        const Expression fpsi = substitute(f, psi.fwd);
        const ComplexExpression p_fpsi = apply_operator(p_src, fpsi);
        for (const auto& yp : grid) {
            const Vector y = to_vector(yp);
            const Complex lhs = pf.eval_at(psi.apply_unchecked(y));
            const Complex rhs = p_fpsi.eval_at(y);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

inline double commuting_residual(const BasicOperator& p, const LocalMap& psi, int grid_n = 9) {
    return commuting_residual(p, p, psi, default_test_functions(p.q()), grid_n);
}

// --- PDE system of the quasi-analyticity lemma ----------------------------

/// Residuals of P_{>=1} phi^k = a_k(phi), one per coordinate, maximized
/// over a grid of dom(phi).
inline std::vector<double> pde_residual(const BasicOperator& p, const LocalMap& phi, int grid_n) {
    const int q = p.q();
    std::vector<double> res(static_cast<size_t>(q), 0.0);
    const auto grid = interior_grid(phi.dom, grid_n);
    for (int k = 0; k < q; ++k) {
        const ComplexExpression lhs = apply_operator(p, phi.fwd[static_cast<size_t>(k)],
                                                     OperatorPart::OrderGeOne);
        std::vector<int> sk(static_cast<size_t>(q), 0);
        sk[static_cast<size_t>(k)] = 1;
        const OperatorTerm* ak = p.term(sk);
        ComplexExpression rhs;
        if (ak) {
            rhs.re = substitute(ak->re, phi.fwd);
            rhs.im = substitute(ak->im, phi.fwd);
        }
        for (const auto& yp : grid) {
            const Vector y = to_vector(yp);
            res[static_cast<size_t>(k)] =
                std::max(res[static_cast<size_t>(k)], std::abs(lhs.eval_at(y) - rhs.eval_at(y)));
        }
    }
    return res;
}

// --- breadth-first machinery ------------------------------------------------
//
// All searches walk points (not symbolic compositions): a word is
// applicable at a point when each intermediate image lies in the next
// generator's domain. Exploration order is fixed (FIFO over signed
// indices +1, -1, +2, -2, ...), so shortest-then-lexicographic tie
// breaking is a property of the traversal itself.

namespace detail {

using PointKey = std::pair<std::string, std::vector<int64_t>>;

inline PointKey point_key(const ChartPoint& cp, double res) {
    return {cp.chart, quantize(to_std(cp.p), res)};
}

}  // namespace detail

/// Breadth-first orbit enumeration: every h(z) over words of length at
/// most max_len, deduplicated at resolution tol::orbit_dedup. The start
/// point is included (the empty word). Throws FrontierOverflow past cap.
inline std::vector<ChartPoint> orbit(const PseudogroupSpec& h, const ChartPoint& start,
                                     int max_len, size_t cap = tol::frontier_cap) {
    if (!h.find_chart(start.chart)) throw ChartMismatch("orbit start chart unknown");
    std::vector<ChartPoint> out;
    std::map<detail::PointKey, bool> seen;
    std::deque<std::pair<ChartPoint, int>> frontier;  // (point, word length)
    const auto push = [&](const ChartPoint& cp, int len) {
        const auto key = detail::point_key(cp, tol::orbit_dedup);
        if (seen.count(key)) return;
        seen.emplace(key, true);
        out.push_back(cp);
        if (out.size() > cap) throw FrontierOverflow("orbit enumeration exceeded the frontier cap");
        if (len < max_len) frontier.emplace_back(cp, len);
    };
    push(start, 0);
    const auto sg = h.signed_generators();
    while (!frontier.empty()) {
        const auto [cp, len] = frontier.front();
        frontier.pop_front();
        for (const auto& [s, g] : sg) {
            if (g.chart_src != cp.chart || !g.contains(cp.p)) continue;
            push({g.chart_dst, g.apply_unchecked(cp.p)}, len + 1);
        }
    }
    return out;
}

/// max over a probe grid of the region of the distance to the nearest
/// orbit point in the same chart (infinity when the orbit misses the chart).
inline double coverage_gap(const std::vector<ChartPoint>& orbit_points, const std::string& chart,
                           const Box& region, int probe_n = 33) {
    double gap = 0.0;
    for (const auto& pp : interior_grid(region, probe_n)) {
        const Vector probe = to_vector(pp);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& cp : orbit_points) {
            if (cp.chart != chart) continue;
            best = std::min(best, (cp.p - probe).norm());
        }
        gap = std::max(gap, best);
    }
    return gap;
}

/// Shortest word (ties broken lexicographically in the +1,-1,+2,-2,...
/// order) with |realize(word)(z) - target| < eps; the empty word when the
/// start already matches. nullopt signals an exhausted search, not
/// non-transitivity.
inline std::optional<Word> find_word(const PseudogroupSpec& h, const ChartPoint& start,
                                     const ChartPoint& target, double eps, int max_len,
                                     size_t cap = tol::frontier_cap) {
    const auto matches = [&](const ChartPoint& cp) {
        return cp.chart == target.chart && (cp.p - target.p).norm() < eps;
    };
    if (matches(start)) return Word{};
    std::map<detail::PointKey, bool> seen;
    std::deque<std::pair<ChartPoint, Word>> frontier;
    seen.emplace(detail::point_key(start, tol::orbit_dedup), true);
    frontier.emplace_back(start, Word{});
    const auto sg = h.signed_generators();
    size_t visited = 1;
    while (!frontier.empty()) {
        const auto [cp, word] = frontier.front();
        frontier.pop_front();
        for (const auto& [s, g] : sg) {
            if (g.chart_src != cp.chart || !g.contains(cp.p)) continue;
            ChartPoint next{g.chart_dst, g.apply_unchecked(cp.p)};
            Word nw = word;
            nw.push_back(s);
            if (matches(next)) return nw;
            const auto key = detail::point_key(next, tol::orbit_dedup);
            if (seen.count(key)) continue;
            seen.emplace(key, true);
            if (++visited > cap) throw FrontierOverflow("find_word exceeded the frontier cap");
            if (static_cast<int>(nw.size()) < max_len) frontier.emplace_back(next, std::move(nw));
        }
    }
    return std::nullopt;
}

// --- uniform bounds on tangent maps ----------------------------------------

struct JacobianBounds {
    double lambda_hat = std::numeric_limits<double>::infinity();
    double mu_hat = 0.0;
    size_t words_sampled = 0;
};

/// Empirical bounds: min/max of ||J(psi_w)(y)|| over all words of length
/// at most max_len applicable at grid points y of the generator domains.
/// These are estimates over the enumerated finite sample; the bounds in
/// the underlying statement are existential. One multi-source BFS over
/// (point, Jacobian) states serves every grid start.
inline JacobianBounds jacobian_bounds(const PseudogroupSpec& h, int max_len, int grid_n,
                                      size_t cap = tol::frontier_cap) {
    if (max_len < 1) throw ParameterOutOfRange("max_len must be at least 1");
    JacobianBounds out;
    const auto sg = h.signed_generators();
    std::map<std::pair<detail::PointKey, std::vector<int64_t>>, bool> seen;
    std::deque<std::tuple<ChartPoint, Matrix, int>> frontier;
    size_t visited = 0;
    const auto push = [&](const ChartPoint& cp, const Matrix& j, int len) {
        const auto key =
            std::make_pair(detail::point_key(cp, tol::orbit_dedup), quantize(j, tol::matrix_dedup));
        if (seen.count(key)) return;
        seen.emplace(key, true);
        if (++visited > cap)
            throw FrontierOverflow(
                "jacobian_bounds exceeded the frontier cap; lower max_len or grid_n");
        frontier.emplace_back(cp, j, len);
    };
    for (const auto& gen : h.gens)
        for (const auto& yp : interior_grid(gen.map.dom, grid_n))
            push({gen.map.chart_src, to_vector(yp)}, Matrix::Identity(h.q, h.q), 0);
    while (!frontier.empty()) {
        const auto [cp, jac, len] = frontier.front();
        frontier.pop_front();
        for (const auto& [s, g] : sg) {
            if (g.chart_src != cp.chart || !g.contains(cp.p)) continue;
            const Matrix j = g.jacobian_unchecked(cp.p) * jac;
            const ChartPoint next{g.chart_dst, g.apply_unchecked(cp.p)};
            const double norm = opnorm(j);
            out.lambda_hat = std::min(out.lambda_hat, norm);
            out.mu_hat = std::max(out.mu_hat, norm);
            ++out.words_sampled;
            if (len + 1 < max_len) push(next, j, len + 1);
        }
    }
    return out;
}

// --- equicontinuity ----------------------------------------------------------

struct EquicontinuityResult {
    bool pass = true;
    double worst_ratio = 0.0;
    size_t pairs_checked = 0;
};

/// Samples point pairs in chart boxes and walks them through every
/// applicable word up to max_len, checking the Lipschitz bound
/// d(psi(z), psi(w)) <= mu (1 + slack) d(z, w). Domains are boxes, hence
/// convex, so the straight segment between a surviving pair stays inside
/// every intermediate domain automatically.
inline EquicontinuityResult equicontinuity_check(const PseudogroupSpec& h, double mu, int pairs_n,
                                                 int max_len, unsigned seed = 42,
                                                 size_t cap = tol::frontier_cap) {
    if (mu <= 0.0) throw ParameterOutOfRange("mu must be positive");
    EquicontinuityResult out;
    std::mt19937 rng(seed);
    const auto sg = h.signed_generators();
    for (int i = 0; i < pairs_n; ++i) {
        const Chart& c = h.charts[static_cast<size_t>(i) % h.charts.size()];
        Vector z(h.q), w(h.q);
        for (int k = 0; k < h.q; ++k) {
            std::uniform_real_distribution<double> u(c.box.iv[static_cast<size_t>(k)].lo,
                                                     c.box.iv[static_cast<size_t>(k)].hi);
            z(k) = u(rng);
            w(k) = u(rng);
        }
        const double d0 = (z - w).norm();
        if (d0 < 1e-12) continue;
        ++out.pairs_checked;
        std::map<std::pair<detail::PointKey, std::vector<int64_t>>, bool> seen;
        std::deque<std::tuple<ChartPoint, Vector, int>> frontier;
        frontier.emplace_back(ChartPoint{c.id, z}, w, 0);
        size_t visited = 0;
        while (!frontier.empty()) {
            const auto [cz, pw, len] = frontier.front();
            frontier.pop_front();
            for (const auto& [s, g] : sg) {
                if (g.chart_src != cz.chart || !g.contains(cz.p) || !g.contains(pw)) continue;
                const Vector nz = g.apply_unchecked(cz.p), nw = g.apply_unchecked(pw);
                out.worst_ratio = std::max(out.worst_ratio, (nz - nw).norm() / d0);
                if (len + 1 >= max_len) continue;
                const auto key = std::make_pair(detail::point_key({g.chart_dst, nz}, tol::orbit_dedup),
                                                quantize(to_std(nw), tol::orbit_dedup));
                if (seen.count(key)) continue;
                seen.emplace(key, true);
                if (++visited > cap)
                    throw FrontierOverflow("equicontinuity_check exceeded the frontier cap");
                frontier.emplace_back(ChartPoint{g.chart_dst, nz}, nw, len + 1);
            }
        }
    }
    out.pass = out.worst_ratio <= mu * (1.0 + tol::equicont_slack);
    return out;
}

// --- identity probe (quasi-analyticity) ---------------------------------------

enum class IdentityVerdict {
    IdentityEverywhere,
    NotIdentityOnSub,
    /// Identity on the sub-box but not on the whole domain. Structurally
    /// impossible for analytic maps; returned only if a map is broken.
    IdentityOnSubOnly
};

/// Checks psi = id on sub symbolically (each psi^k - y_k simplifies to the
/// zero expression) and falls back to dense sampling at the orbit
/// resolution. Since maps are analytic expressions, identity on sub forces
/// identity on the whole (connected box) domain; the probe asserts that.
inline IdentityVerdict identity_probe(const LocalMap& psi, const Box& sub) {
    if (!sub.subset_of(psi.dom)) throw ParameterOutOfRange("probe box must sit inside dom(psi)");
    if (psi.chart_src == psi.chart_dst) {
        bool symbolic_id = true;
        for (int k = 0; k < psi.dim(); ++k)
            if (!is_zero_expression(psi.fwd[static_cast<size_t>(k)] - coord(k))) symbolic_id = false;
        if (symbolic_id) return IdentityVerdict::IdentityEverywhere;
    } else {
        return IdentityVerdict::NotIdentityOnSub;
    }
    const auto identical_on = [&](const Box& b) {
        for (const auto& yp : interior_grid(b, 7)) {
            const Vector y = to_vector(yp);
            if ((psi.apply_unchecked(y) - y).cwiseAbs().maxCoeff() > tol::orbit_dedup) return false;
        }
        return true;
    };
    if (!identical_on(sub)) return IdentityVerdict::NotIdentityOnSub;
    return identical_on(psi.dom) ? IdentityVerdict::IdentityEverywhere
                                 : IdentityVerdict::IdentityOnSubOnly;
}

}  // namespace foliage
