#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/linalg.hpp"
#include "foliage/local_map.hpp"
#include "foliage/pseudogroup.hpp"
#include "foliage/scenarios.hpp"
#include "foliage/tolerances.hpp"

namespace foliage {

// ===================================================================
// The Average Method: germ-Jacobian group at a base point, closure
// classification, Haar-averaged inner product, translation transport,
// gluing over cover words, and the invariance verdict.
// ===================================================================

struct GermGroup {
    ChartPoint base;
    std::vector<Matrix> gens;  // deduplicated Jacobians of isotropy words
};

/// Enumerates words w with |realize(w)(z) - z| < eps_fix and collects
/// their Jacobians at z, deduplicated at tol::matrix_dedup. The identity
/// (empty word) is always included. States are (point, Jacobian) pairs so
/// distinct germs over the same orbit point are all explored.
inline GermGroup germ_jacobian_group(const PseudogroupSpec& h, const ChartPoint& z, int max_len,
                                     double eps_fix = 1e-6, size_t cap = tol::frontier_cap) {
    if (!h.find_chart(z.chart)) throw ChartMismatch("germ base chart unknown");
    GermGroup out;
    out.base = z;
    std::map<std::vector<int64_t>, bool> collected;
    const auto collect = [&](const Matrix& j) {
        const auto key = quantize(j, tol::matrix_dedup);
        if (collected.count(key)) return;
        collected.emplace(key, true);
        out.gens.push_back(j);
    };
    collect(Matrix::Identity(h.q, h.q));

    std::map<std::pair<detail::PointKey, std::vector<int64_t>>, bool> seen;
    std::deque<std::tuple<ChartPoint, Matrix, int>> frontier;
    frontier.emplace_back(z, Matrix::Identity(h.q, h.q), 0);
    const auto sg = h.signed_generators();
    size_t visited = 1;
    while (!frontier.empty()) {
        const auto [cp, jac, len] = frontier.front();
        frontier.pop_front();
        for (const auto& [s, g] : sg) {
            if (g.chart_src != cp.chart || !g.contains(cp.p)) continue;
            const ChartPoint next{g.chart_dst, g.apply_unchecked(cp.p)};
            const Matrix j = g.jacobian_unchecked(cp.p) * jac;
            if (next.chart == z.chart && (next.p - z.p).norm() < eps_fix) collect(j);
            if (len + 1 >= max_len) continue;
            const auto key = std::make_pair(detail::point_key(next, tol::orbit_dedup),
                                            quantize(j, tol::matrix_dedup));
            if (seen.count(key)) continue;
            seen.emplace(key, true);
            if (++visited > cap)
                throw FrontierOverflow("germ enumeration exceeded the frontier cap");
            frontier.emplace_back(next, j, len + 1);
        }
    }
    return out;
}

// --- closure classification -------------------------------------------------

struct TorusBlock {
    int axis0 = 0, axis1 = 1;
};

/// Closure of the germ-Jacobian group in GL(V). Exactly the cases the
/// bundled scenarios produce are recognized: finite groups (stabilizing
/// product closure) and commuting rotation blocks in the standard frame
/// (a torus). Anything else is Unknown and the pipeline refuses to average.
struct ClosureClass {
    enum class Kind { Finite, Torus, Unknown } kind = Kind::Unknown;
    std::vector<Matrix> elements;    // Finite
    std::vector<TorusBlock> blocks;  // Torus (standard orthonormal frame)
    std::vector<Matrix> generators;  // the germ generators, kept for checks
    int dim = 0;
};

inline ClosureClass classify_closure(const GermGroup& g, int n_max = tol::closure_max_elements,
                                     double tolerance = tol::matrix_dedup) {
    ClosureClass out;
    const int q = g.gens.empty() ? 0 : static_cast<int>(g.gens.front().rows());
    out.dim = q;
    out.generators = g.gens;

    // seed with generators and their inverses
    std::vector<Matrix> seeds = g.gens;
    for (const auto& m : g.gens) seeds.push_back(m.inverse());
    seeds.push_back(Matrix::Identity(q, q));

    // a finite group never leaves the ball spanned by its own elements;
    // runaway norms prove non-compactness (and would overflow the
    // quantized dedup keys)
    const double norm_guard = 1e8;
    std::map<std::vector<int64_t>, bool> seen;
    std::vector<Matrix> elements;
    std::deque<Matrix> queue;
    bool finite = true;
    const auto push = [&](const Matrix& m) {
        if (opnorm(m) > norm_guard) {
            finite = false;
            return;
        }
        const auto key = quantize(m, tolerance);
        if (seen.count(key)) return;
        seen.emplace(key, true);
        elements.push_back(m);
        queue.push_back(m);
    };
    for (const auto& m : seeds) push(m);
    while (finite && !queue.empty()) {
        const Matrix e = queue.front();
        queue.pop_front();
        for (const auto& s : seeds) {
            push(e * s);
            if (static_cast<int>(elements.size()) > n_max) {
                finite = false;
                break;
            }
        }
    }
    if (finite) {
        out.kind = ClosureClass::Kind::Finite;
        out.elements = std::move(elements);
        return out;
    }

    // torus attempt: commuting orthogonal block rotations in the standard frame
    const double block_tol = 1e-8;
    for (const auto& a : g.gens) {
        if ((a.transpose() * a - Matrix::Identity(q, q)).cwiseAbs().maxCoeff() > block_tol)
            return out;  // not orthogonal
        for (const auto& b : g.gens)
            if ((a * b - b * a).cwiseAbs().maxCoeff() > block_tol) return out;
    }
    std::vector<bool> active(static_cast<size_t>(q / 2), false);
    for (const auto& a : g.gens) {
        for (int i = 0; i + 1 < q; i += 2) {
            // entries outside the 2x2 diagonal blocks must vanish
            for (int r = i; r < i + 2; ++r)
                for (int c = 0; c < q; ++c)
                    if ((c < i || c >= i + 2) && std::abs(a(r, c)) > block_tol) return out;
            const double cth = a(i, i), sth = a(i + 1, i);
            if (std::abs(a(i + 1, i + 1) - cth) > block_tol ||
                std::abs(a(i, i + 1) + sth) > block_tol ||
                std::abs(cth * cth + sth * sth - 1.0) > block_tol)
                return out;
            if (std::abs(cth - 1.0) > block_tol || std::abs(sth) > block_tol)
                active[static_cast<size_t>(i / 2)] = true;
        }
        if (q % 2 == 1 && std::abs(a(q - 1, q - 1) - 1.0) > block_tol) return out;
    }
    out.kind = ClosureClass::Kind::Torus;
    for (int i = 0; i + 1 < q; i += 2)
        if (active[static_cast<size_t>(i / 2)]) out.blocks.push_back({i, i + 1});
    return out;
}

// --- Haar average --------------------------------------------------------------

/// g_z = integral over the closure of gamma^* <.,.> d mu_Haar, against the
/// base inner product. Finite closures use the group average; torus
/// closures use a uniform angle quadrature per active block (exact for the
/// degree-2 trigonometric integrands arising here). The result is checked
/// symmetric, SPD and invariant under the germ generators.
inline Matrix haar_average_inner_product(const ClosureClass& c, const Matrix& base,
                                         int nodes = tol::haar_nodes) {
    if (!is_spd(base)) throw ParameterOutOfRange("base inner product must be SPD");
    const int q = static_cast<int>(base.rows());
    Matrix acc = Matrix::Zero(q, q);
    if (c.kind == ClosureClass::Kind::Unknown) throw UnknownClosure();
    if (c.kind == ClosureClass::Kind::Finite) {
        for (const auto& m : c.elements) acc += m.transpose() * base * m;
        acc /= static_cast<double>(c.elements.size());
    } else {
        const size_t nb = c.blocks.size();
        if (nb == 0) {
            acc = base;  // trivial torus
        } else {
            std::vector<int> idx(nb, 0);
            size_t count = 0;
            while (true) {
                Matrix gamma = Matrix::Identity(q, q);
                for (size_t bi = 0; bi < nb; ++bi) {
                    const double th = 2.0 * M_PI * idx[bi] / nodes;
                    const auto& blk = c.blocks[bi];
                    gamma(blk.axis0, blk.axis0) = std::cos(th);
                    gamma(blk.axis0, blk.axis1) = -std::sin(th);
                    gamma(blk.axis1, blk.axis0) = std::sin(th);
                    gamma(blk.axis1, blk.axis1) = std::cos(th);
                }
                acc += gamma.transpose() * base * gamma;
                ++count;
                size_t k = nb;
                while (k > 0 && ++idx[k - 1] == nodes) idx[--k] = 0;
                if (k == 0) break;
            }
            acc /= static_cast<double>(count);
        }
    }
    acc = 0.5 * (acc + acc.transpose());  // exact symmetry
    if (!is_spd(acc)) throw CheckFailed("Haar average lost positive definiteness");
    for (const auto& m : c.generators)
        if (max_abs_diff(m.transpose() * acc * m, acc) > 1e-9)
            throw CheckFailed("Haar average is not invariant under a germ generator");
    return acc;
}

// --- metric fields ----------------------------------------------------------------

/// A point -> SPD matrix assignment on a box of one chart. Constant and
/// symbolic-entry fields are exact; grid fields interpolate multilinearly
/// between lattice nodes (offset lattice, clamped at the edges).
class MetricField {
public:
    enum class Kind { Constant, Expr, Grid };

    Kind kind = Kind::Constant;
    std::string chart;
    Box region;
    int q = 0;
    Matrix constant;
    std::vector<Expression> entries;  // row-major, q*q
    int grid_nodes = 0;
    std::vector<Matrix> grid_values;  // lexicographic over the node lattice

    static MetricField constant_field(std::string chart, Box region, Matrix value) {
        MetricField f;
        f.kind = Kind::Constant;
        f.chart = std::move(chart);
        f.region = std::move(region);
        f.q = static_cast<int>(value.rows());
        f.constant = std::move(value);
        return f;
    }

    static MetricField expr_field(std::string chart, Box region, std::vector<Expression> entries) {
        MetricField f;
        f.kind = Kind::Expr;
        f.chart = std::move(chart);
        f.region = std::move(region);
        f.q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(entries.size()))));
        f.entries = std::move(entries);
        return f;
    }

    static MetricField grid_field(std::string chart, Box region, int nodes,
                                  const std::function<Matrix(const Vector&)>& sample) {
        MetricField f;
        f.kind = Kind::Grid;
        f.chart = std::move(chart);
        f.region = region;
        f.q = region.dim();
        f.grid_nodes = nodes;
        for (const auto& p : grid_lattice(region, nodes)) f.grid_values.push_back(sample(to_vector(p)));
        return f;
    }

    /// Offset node lattice used by grid fields and by gluing probes.
    static std::vector<std::vector<double>> grid_lattice(const Box& region, int nodes) {
        const int q = region.dim();
        std::vector<std::vector<double>> pts;
        std::vector<int> idx(static_cast<size_t>(q), 0);
        while (true) {
            std::vector<double> p(static_cast<size_t>(q));
            for (int k = 0; k < q; ++k) {
                const auto& iv = region.iv[static_cast<size_t>(k)];
                p[static_cast<size_t>(k)] = iv.lo + (idx[static_cast<size_t>(k)] + 0.5) * iv.width() / nodes;
            }
            pts.push_back(std::move(p));
            int k = q - 1;
            while (k >= 0 && ++idx[static_cast<size_t>(k)] == nodes) {
                idx[static_cast<size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
        }
        return pts;
    }

    Matrix value_at(const Vector& w) const {
        switch (kind) {
            case Kind::Constant:
                return constant;
            case Kind::Expr: {
                Matrix m(q, q);
                for (int i = 0; i < q; ++i)
                    for (int j = 0; j < q; ++j)
                        m(i, j) = eval(entries[static_cast<size_t>(i * q + j)], w);
                return m;
            }
            case Kind::Grid:
                return interpolate(w);
        }
        throw Error("unreachable metric field kind");
    }

    /// Worst sampled deviation from symmetry-positive-definiteness; the
    /// minimum eigenvalue observed over an interior grid.
    double min_eigenvalue_sampled(int grid_n = 7) const {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& p : interior_grid(region, grid_n))
            lo = std::min(lo, min_eigenvalue_sym(value_at(to_vector(p))));
        return lo;
    }

private:
    Matrix interpolate(const Vector& w) const {
        const int n = grid_nodes;
        std::vector<int> cell(static_cast<size_t>(q));
        std::vector<double> frac(static_cast<size_t>(q));
        for (int k = 0; k < q; ++k) {
            const auto& iv = region.iv[static_cast<size_t>(k)];
            const double t = (w(k) - iv.lo) / iv.width() * n - 0.5;  // node index space
            const double tc = std::min(std::max(t, 0.0), static_cast<double>(n - 1));
            const int i0 = std::min(static_cast<int>(std::floor(tc)), n - 2 >= 0 ? n - 2 : 0);
            cell[static_cast<size_t>(k)] = i0;
            frac[static_cast<size_t>(k)] = n > 1 ? tc - i0 : 0.0;
        }
        Matrix acc = Matrix::Zero(q, q);
        const int corners = 1 << q;
        for (int c = 0; c < corners; ++c) {
            double wgt = 1.0;
            size_t flat = 0;
            for (int k = 0; k < q; ++k) {
                const int bit = (c >> k) & 1;
                const int ik = std::min(cell[static_cast<size_t>(k)] + bit, n - 1);
                wgt *= bit ? frac[static_cast<size_t>(k)] : 1.0 - frac[static_cast<size_t>(k)];
                flat = flat * static_cast<size_t>(n) + static_cast<size_t>(ik);
            }
            acc += wgt * grid_values[flat];
        }
        return acc;
    }
};

// --- transport -----------------------------------------------------------------

namespace detail {

/// Axis-aligned translation steps available in a chart: generators whose
/// forward is y + c e_k with identity Jacobian.
inline std::vector<std::pair<int, double>> translation_steps(const PseudogroupSpec& h,
                                                             const std::string& chart) {
    std::vector<std::pair<int, double>> steps;
    for (const auto& gen : h.gens) {
        const LocalMap& g = gen.map;
        if (g.chart_src != chart || g.chart_dst != chart) continue;
        const Vector c0 = to_vector(g.dom.center());
        const Vector off = g.apply_unchecked(c0) - c0;
        int axis = -1;
        bool ok = true;
        for (int k = 0; k < g.dim(); ++k) {
            if (std::abs(off(k)) < 1e-15) continue;
            if (axis >= 0) ok = false;
            axis = k;
        }
        if (!ok || axis < 0) continue;
        for (const auto& yp : interior_grid(g.dom, 3)) {
            const Vector y = to_vector(yp);
            if ((g.apply_unchecked(y) - y - off).cwiseAbs().maxCoeff() > 1e-12) {
                ok = false;
                break;
            }
        }
        if (ok) steps.emplace_back(axis, off(axis));
    }
    return steps;
}

}  // namespace detail

/// Transport of the averaged inner product g_z over a region of the chart
/// through the translations T_w (sending w to the base point). Where only
/// exact translations are involved the tangent maps are the identity and
/// the transported field is the constant g_z; the computation still goes
/// through the pullback formula at sampled w as a guard.
///
/// The reachable cube is the chart box shrunk by 2*eps, provided the chart
/// carries translation generators in both directions of every axis;
/// otherwise (a holonomy-only chart) the cube is empty and every region is
/// OutOfReach.
inline MetricField transport_metric(const Matrix& g_z, const PseudogroupSpec& h,
                                    const std::string& chart, const Box& region, double eps) {
    const Chart& c = h.chart(chart);
    const auto steps = detail::translation_steps(h, chart);
    for (int k = 0; k < h.q; ++k) {
        bool plus = false, minus = false;
        for (const auto& [axis, step] : steps) {
            if (axis != k) continue;
            (step > 0.0 ? plus : minus) = true;
        }
        if (!plus || !minus)
            throw OutOfReach("chart '" + chart +
                             "' has no translation generators along axis " + std::to_string(k + 1) +
                             "; the transport cube is empty");
    }
    const Box cube = c.box.shrunk(2.0 * eps);
    if (!cube.valid() || !region.subset_of(cube))
        throw OutOfReach("region exceeds the transport cube of chart '" + chart + "'");
    // guard: pull g_z back through sampled translations T_w
    for (const auto& wp : interior_grid(region, 3)) {
        const Vector w = to_vector(wp);
        const LocalMap t_w = translation_map(region, -w, chart, chart);
        const Matrix j = t_w.jacobian_unchecked(w);
        if (max_abs_diff(j.transpose() * g_z * j, g_z) > 1e-12)
            throw CheckFailed("translation transport produced a non-constant field");
    }
    return MetricField::constant_field(chart, region, g_z);
}

/// Transport through a conjugating cocycle h: the field w -> J(h)(w)^T g_z
/// J(h)(w) on a region of h's source chart. Emitted with symbolic entries
/// (exact) unless the Jacobian is constant, in which case the field is
/// constant.
inline MetricField transport_metric_conjugated(const Matrix& g_z, const LocalMap& conj,
                                               const Box& region) {
    if (!region.subset_of(conj.dom))
        throw OutOfReach("conjugated transport region exceeds the cocycle domain");
    const int q = conj.dim();
    bool constant_jac = true;
    for (int k = 0; k < q && constant_jac; ++k)
        for (int l = 0; l < q && constant_jac; ++l)
            if (!is_const(conj.jacobian_entry(k, l))) constant_jac = false;
    if (constant_jac) {
        const Matrix j = conj.jacobian_unchecked(to_vector(region.center()));
        return MetricField::constant_field(conj.chart_src, region, j.transpose() * g_z * j);
    }
    std::vector<Expression> entries;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            Expression e = lit(0.0);
            for (int k = 0; k < q; ++k)
                for (int l = 0; l < q; ++l)
                    e = e + conj.jacobian_entry(k, i) * lit(g_z(k, l)) * conj.jacobian_entry(l, j);
            entries.push_back(simplify(e));
        }
    return MetricField::expr_field(conj.chart_src, region, std::move(entries));
}

// --- gluing ---------------------------------------------------------------------

struct GlueResult {
    MetricField field;
    double overlap_residual = 0.0;
    size_t words_realized = 0;
};

/// Pulls g_O back over the cover words and glues: the value at a probe is
/// the pullback through the first covering word (deterministic order);
/// the overlap residual is the worst disagreement between pullbacks where
/// several words cover the same probe. Uncovered probes raise CoverageGap.
inline GlueResult glue_metric(const MetricField& g_o, const PseudogroupSpec& h,
                              const std::vector<Word>& cover_words, const std::string& chart,
                              const Box& region, int probe_n) {
    // realize the cover words once; unrealizable words are skipped
    std::vector<LocalMap> maps;
    const Chart& target_chart = h.chart(g_o.chart);
    for (const auto& w : cover_words) {
        try {
            if (w.empty()) {
                maps.push_back(identity_map(target_chart.box, g_o.chart));
            } else {
                maps.push_back(realize_word(h, w));
            }
        } catch (const EmptyDomain&) {
        } catch (const ChartMismatch&) {
        }
    }

    const auto probes = MetricField::grid_lattice(region, probe_n);
    std::vector<Matrix> values;
    values.reserve(probes.size());
    double residual = 0.0;
    std::vector<std::vector<double>> uncovered;
    for (const auto& pp : probes) {
        const Vector p = to_vector(pp);
        bool covered = false;
        Matrix first;
        for (const auto& m : maps) {
            if (m.chart_src != chart || m.chart_dst != g_o.chart) continue;
            if (!m.dom.contains(to_std(p))) continue;
            const Vector image = m.apply_unchecked(p);
            if (!g_o.region.contains(to_std(image))) continue;
            const Matrix j = m.jacobian_unchecked(p);
            const Matrix pullback = j.transpose() * g_o.value_at(image) * j;
            if (!covered) {
                first = pullback;
                covered = true;
            } else {
                residual = std::max(residual, max_abs_diff(first, pullback));
            }
        }
        if (!covered) {
            uncovered.push_back(pp);
            values.push_back(Matrix::Zero(region.dim(), region.dim()));
        } else {
            values.push_back(first);
        }
    }
    if (!uncovered.empty())
        throw CoverageGap("gluing leaves " + std::to_string(uncovered.size()) +
                              " probe points uncovered on chart '" + chart + "'",
                          uncovered);

    GlueResult out;
    out.words_realized = maps.size();
    out.overlap_residual = residual;
    bool all_equal = true;
    for (const auto& v : values)
        if (max_abs_diff(v, values.front()) > 1e-12) all_equal = false;
    if (all_equal) {
        out.field = MetricField::constant_field(chart, region, values.front());
    } else {
        MetricField f;
        f.kind = MetricField::Kind::Grid;
        f.chart = chart;
        f.region = region;
        f.q = region.dim();
        f.grid_nodes = probe_n;
        f.grid_values = std::move(values);
        out.field = std::move(f);
    }
    return out;
}

// --- invariance ------------------------------------------------------------------

/// max over generators h and sampled z of | J(h)(z)^T g(h(z)) J(h)(z) - g(z) |.
inline double verify_invariance(const std::map<std::string, MetricField>& fields,
                                const PseudogroupSpec& h, int sample_n, unsigned seed = 42) {
    std::mt19937 rng(seed);
    double worst = 0.0;
    for (const auto& gen : h.gens) {
        const LocalMap& g = gen.map;
        const auto src = fields.find(g.chart_src);
        const auto dst = fields.find(g.chart_dst);
        if (src == fields.end() || dst == fields.end())
            throw ChartMismatch("verify_invariance: no metric field on a generator chart");
        const auto overlap = intersect(g.dom, src->second.region);
        if (!overlap) throw ParameterOutOfRange("generator domain misses the metric region");
        int accepted = 0;
        for (int attempt = 0; attempt < 50 * sample_n && accepted < sample_n; ++attempt) {
            Vector z(g.dim());
            for (int k = 0; k < g.dim(); ++k) {
                std::uniform_real_distribution<double> u(overlap->iv[static_cast<size_t>(k)].lo,
                                                         overlap->iv[static_cast<size_t>(k)].hi);
                z(k) = u(rng);
            }
            const Vector image = g.apply_unchecked(z);
            if (!dst->second.region.contains(to_std(image))) continue;
            ++accepted;
            const Matrix j = g.jacobian_unchecked(z);
            worst = std::max(worst,
                             max_abs_diff(j.transpose() * dst->second.value_at(image) * j,
                                          src->second.value_at(z)));
        }
        if (accepted == 0)
            throw ParameterOutOfRange(
                "no sample of a generator domain landed inside the metric regions; "
                "the invariance of that generator would go unchecked");
    }
    return worst;
}

inline double verify_invariance(const MetricField& field, const PseudogroupSpec& h, int sample_n,
                                unsigned seed = 42) {
    std::map<std::string, MetricField> fields;
    for (const auto& c : h.charts) {
        MetricField f = field;
        f.chart = c.id;
        fields.emplace(c.id, std::move(f));
    }
    return verify_invariance(fields, h, sample_n, seed);
}

// --- the full pipeline --------------------------------------------------------------

struct AverageMethodOptions {
    Matrix base;  // empty -> identity
    int germ_max_len = 3;
    double eps_fix = 1e-6;
    int probe_n = 9;
    int sample_n = 64;
    unsigned seed = 42;
};

struct AverageMethodReport {
    GermGroup germ;
    ClosureClass closure;
    Matrix g_z;
    MetricField transported;
    std::map<std::string, MetricField> glued;
    double overlap_residual = 0.0;
    double invariance_residual = 0.0;
    double min_eigenvalue = 0.0;
};

/// All words over the signed generators up to the given length, shortest
/// first, lexicographic within a length; the empty word leads.
inline std::vector<Word> enumerate_cover_words(const PseudogroupSpec& h, int max_len) {
    std::vector<Word> words{{}};
    size_t level_begin = 0;
    const auto idx = h.signed_indices();
    for (int len = 1; len <= max_len; ++len) {
        const size_t level_end = words.size();
        for (size_t i = level_begin; i < level_end; ++i)
            for (int s : idx) {
                Word w = words[i];
                w.push_back(s);
                words.push_back(std::move(w));
            }
        level_begin = level_end;
    }
    return words;
}

/// Germ group -> closure -> Haar average -> translation transport -> gluing
/// -> invariance sweep, on one scenario.
inline AverageMethodReport run_average_method(const Scenario& s, AverageMethodOptions opt = {}) {
    AverageMethodReport r;
    const int q = s.q;
    if (opt.base.size() == 0) opt.base = Matrix::Identity(q, q);

    r.germ = germ_jacobian_group(s.pseudogroup, {s.averaging_chart, s.base_point},
                                 opt.germ_max_len, opt.eps_fix);
    r.closure = classify_closure(r.germ);
    r.g_z = haar_average_inner_product(r.closure, opt.base);

    const Chart& chart = s.pseudogroup.chart(s.averaging_chart);
    const Box cube = chart.box.shrunk(2.0 * s.transport_eps);
    r.transported = transport_metric(r.g_z, s.pseudogroup, s.averaging_chart, cube,
                                     s.transport_eps);

    const auto words = enumerate_cover_words(s.pseudogroup, s.cover_word_len);
    for (const auto& c : s.pseudogroup.charts) {
        GlueResult gr = glue_metric(r.transported, s.pseudogroup, words, c.id, c.box, opt.probe_n);
        r.overlap_residual = std::max(r.overlap_residual, gr.overlap_residual);
        r.glued.emplace(c.id, std::move(gr.field));
    }
    r.invariance_residual = verify_invariance(r.glued, s.pseudogroup, opt.sample_n, opt.seed);

    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& [id, f] : r.glued)
        r.min_eigenvalue = std::min(r.min_eigenvalue, f.min_eigenvalue_sampled());
    return r;
}

}  // namespace foliage
