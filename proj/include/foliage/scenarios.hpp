#pragma once

#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/linalg.hpp"
#include "foliage/local_map.hpp"
#include "foliage/operator.hpp"
#include "foliage/pseudogroup.hpp"

namespace foliage {

// ===================================================================
// Built-in foliation scenarios. Each packages a transversal atlas, a
// pseudogroup spec and a basic operator per chart, plus the averaging
// configuration the metric pipeline needs.
// ===================================================================

struct Scenario {
    std::string name;
    std::string description;
    int q = 0;
    PseudogroupSpec pseudogroup;
    std::map<std::string, BasicOperator> operators;  // keyed by chart id

    // averaging configuration
    std::string averaging_chart;
    Vector base_point;
    double transport_eps = 0.01;
    int cover_word_len = 2;

    const BasicOperator& operator_on(const std::string& chart) const {
        const auto it = operators.find(chart);
        if (it == operators.end()) throw ChartMismatch("no operator on chart '" + chart + "'");
        return it->second;
    }
};

// --- dense linear foliation of the 3-torus: unbounded holonomy shears --------

struct TorusLoopData {
    Matrix a;     // holonomy Jacobian of the loop c_n
    double norm;  // ||A_n|| from the closed form
    double eig;   // divergent eigenvalue of A_n^T A_n
};

/// Holonomy Jacobian family A_n = [[1, n], [0, 1]] with the closed-form
/// top eigenvalue of A_n^T A_n; the operator norm is its square root.
inline TorusLoopData torus_counterexample(int n) {
    if (n < 0) throw ParameterOutOfRange("loop index must be nonnegative");
    TorusLoopData d;
    d.a = Matrix::Identity(2, 2);
    d.a(0, 1) = n;
    const double nn = static_cast<double>(n);
    d.eig = 0.5 * (nn * nn + 2.0 + nn * std::sqrt(nn * nn + 4.0));
    d.norm = std::sqrt(d.eig);
    return d;
}

// --- rational independence heuristic -----------------------------------------

struct RationalIndependenceReport {
    double ratio = 0.0;
    bool likely_independent = true;
    long num = 0, den = 0;  // best small-denominator approximation found
    double error = 0.0;
};

/// Continued-fraction probe: (a, b) is flagged dependent when a/b admits a
/// rational approximation p/q with q <= denom_bound and error below 1e-10.
/// Reported, never enforced.
inline RationalIndependenceReport rational_independence_heuristic(double a, double b,
                                                                  long denom_bound = 1000) {
    RationalIndependenceReport r;
    r.ratio = a / b;
    double x = r.ratio;
    long p0 = 1, q0 = 0, p1 = static_cast<long>(std::floor(x)), q1 = 1;
    x -= std::floor(x);
    for (int it = 0; it < 64 && q1 <= denom_bound; ++it) {
        r.num = p1;
        r.den = q1;
        r.error = std::abs(r.ratio - static_cast<double>(p1) / static_cast<double>(q1));
        if (r.error < 1e-10) {
            r.likely_independent = false;
            return r;
        }
        if (x < 1e-15) break;
        x = 1.0 / x;
        const double ai = std::floor(x);
        x -= ai;
        const long p2 = static_cast<long>(ai) * p1 + p0;
        const long q2 = static_cast<long>(ai) * q1 + q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    r.likely_independent = true;
    return r;
}

// --- rationally independent translation generators ---------------------------

/// 4q translation generators T^k_{+-a}, T^k_{+-b} on (-1/3, 1/3)^q with
/// extensions on (-2/3, 2/3)^q, in one chart "O" with ambient (-1, 1)^q.
inline PseudogroupSpec make_translation_generators(int q, double a, double b) {
    if (!(a > 0.0 && a < 1.0 / 3.0 && b > 0.0 && b < 1.0 / 3.0))
        throw ParameterOutOfRange("translation steps must lie in (0, 1/3)");
    PseudogroupSpec h;
    h.q = q;
    h.charts.push_back({"O", Box::cube(q, 1.0 / 3.0), Box::cube(q, 1.0)});
    const Box dom = Box::cube(q, 1.0 / 3.0);
    const Box ext_dom = Box::cube(q, 2.0 / 3.0);
    const auto add = [&](int axis, double step) {
        Vector off = Vector::Zero(q);
        off(axis) = step;
        h.gens.push_back({translation_map(dom, off, "O", "O"),
                          translation_map(ext_dom, off, "O", "O")});
    };
    for (double step : {a, b})
        for (int k = 0; k < q; ++k) {
            add(k, step);
            add(k, -step);
        }
    return h;
}

/// The cube-chart translation scenario: translations plus the flat Laplacian.
inline Scenario make_translation_scenario(int q, double a = 0.1 * std::sqrt(2.0),
                                          double b = 0.1 * std::sqrt(3.0)) {
    Scenario s;
    s.name = "translations-q" + std::to_string(q);
    s.description = "translation pseudogroup on one cube chart, flat Laplacian";
    s.q = q;
    s.pseudogroup = make_translation_generators(q, a, b);
    s.operators.emplace("O", laplacian(q));
    s.averaging_chart = "O";
    s.base_point = Vector::Zero(q);
    return s;
}

// --- suspensions ---------------------------------------------------------------

struct FiniteRotations {
    int k = 4;
};
struct IrrationalRotation {
    double alpha = 1.0;
};
struct MatrixGroup {
    std::vector<Matrix> gens;
};
using SuspensionHolonomy = std::variant<FiniteRotations, IrrationalRotation, MatrixGroup>;

namespace detail {

/// Common body: a planar fiber chart around the fixed point of the global
/// transformations, their restrictions as holonomy generators, translation
/// generators for transport, and the flat Laplacian.
inline Scenario planar_suspension(const std::string& name, const std::string& description,
                                  const std::vector<Matrix>& holonomy_gens) {
    Scenario s;
    s.name = name;
    s.description = description;
    s.q = 2;
    s.pseudogroup = make_translation_generators(2, 0.1 * std::sqrt(2.0), 0.1 * std::sqrt(3.0));
    s.pseudogroup.charts[0].id = "F";
    for (auto& g : s.pseudogroup.gens) {
        g.map.chart_src = g.map.chart_dst = "F";
        g.ext.chart_src = g.ext.chart_dst = "F";
    }
    const Box dom = Box::cube(2, 1.0 / 3.0);
    const Box ext_dom = Box::cube(2, 2.0 / 3.0);
    for (const auto& m : holonomy_gens) {
        if (m.rows() != 2 || m.cols() != 2 || std::abs(m.determinant()) < 1e-12)
            throw InvalidGenerator("suspension holonomy matrices must be invertible 2x2");
        s.pseudogroup.gens.push_back(
            {linear_map(dom, m, "F", "F"), linear_map(ext_dom, m, "F", "F")});
    }
    s.operators.emplace("F", laplacian(2));
    s.averaging_chart = "F";
    s.base_point = Vector::Zero(2);
    return s;
}

}  // namespace detail

/// Suspension scenarios, reduced to the holonomy action on the fiber.
/// Rotation actions are modeled on a planar fiber chart around the fixed
/// point, so germ Jacobians at the base point realize the rotation group.
inline Scenario make_suspension(const SuspensionHolonomy& hol) {
    if (const auto* fr = std::get_if<FiniteRotations>(&hol)) {
        if (fr->k < 1) throw InvalidGenerator("rotation order must be positive");
        return detail::planar_suspension(
            "c" + std::to_string(fr->k) + "-suspension",
            "suspension by the cyclic rotation group C_" + std::to_string(fr->k),
            {rotation2(2.0 * M_PI / fr->k)});
    }
    if (const auto* ir = std::get_if<IrrationalRotation>(&hol)) {
        return detail::planar_suspension(
            "so2-suspension", "suspension by an irrational rotation (dense in SO(2))",
            {rotation2(ir->alpha)});
    }
    const auto& mg = std::get<MatrixGroup>(hol);
    if (mg.gens.empty()) throw InvalidGenerator("matrix group needs at least one generator");
    return detail::planar_suspension("matrix-suspension", "suspension by a linear matrix group",
                                     mg.gens);
}

// --- Kronecker flow with a compact leaf ---------------------------------------
//
// Transversal = the circle, two overlapping angle charts; the holonomy
// pseudogroup consists of the chart transitions only (angle shifts by pi).
// Orbits are discrete: the demonstration that holonomy alone cannot feed
// the averaging pipeline.

inline Scenario make_kronecker_compact() {
    Scenario s;
    s.name = "kronecker-compact";
    s.description = "circle transversal of the Kronecker flow with a compact leaf; "
                    "holonomy only, discrete orbits";
    s.q = 1;
    PseudogroupSpec h;
    h.q = 1;
    h.charts.push_back({"A", Box{{Interval{-2.0, 2.0}}}, Box{{Interval{-2.2, 2.2}}}});
    h.charts.push_back({"B", Box{{Interval{-2.0, 2.0}}}, Box{{Interval{-2.2, 2.2}}}});
    const double lo = M_PI - 2.0;  // left edge of the chart overlap
    Vector minus_pi(1), plus_pi(1);
    minus_pi << -M_PI;
    plus_pi << M_PI;
    const Box ov1{{Interval{lo + 0.1, 1.9}}};
    const Box ov1_ext{{Interval{lo + 0.02, 1.98}}};
    const Box ov2{{Interval{-1.9, -lo - 0.1}}};
    const Box ov2_ext{{Interval{-1.98, -lo - 0.02}}};
    h.gens.push_back({translation_map(ov1, minus_pi, "A", "B"),
                      translation_map(ov1_ext, minus_pi, "A", "B")});
    h.gens.push_back({translation_map(ov2, plus_pi, "A", "B"),
                      translation_map(ov2_ext, plus_pi, "A", "B")});
    s.pseudogroup = std::move(h);
    s.operators.emplace("A", laplacian(1));
    s.operators.emplace("B", laplacian(1));
    s.averaging_chart = "A";
    s.base_point = Vector::Zero(1);
    return s;
}

// --- shear pseudogroup (the unbounded torus holonomy as generators) ------------

/// The holonomy shear [[1, n], [0, 1]] of the torus counter-example as a
/// one-generator pseudogroup. No basic transversely elliptic operator
/// commutes with it; used to exhibit equicontinuity failure.
inline PseudogroupSpec shear_pseudogroup(int n) {
    if (n < 0) throw ParameterOutOfRange("shear index must be nonnegative");
    PseudogroupSpec h;
    h.q = 2;
    const double reach = 4.0 * (n + 1);
    h.charts.push_back({"T", Box::cube(2, 1.0 / 3.0), Box::cube(2, reach)});
    Matrix a = Matrix::Identity(2, 2);
    a(0, 1) = n;
    h.gens.push_back({linear_map(Box::cube(2, 0.3), a, "T", "T"),
                      linear_map(Box::cube(2, 1.0 / 3.0), a, "T", "T")});
    return h;
}

// --- registry -------------------------------------------------------------------

inline std::vector<std::string> scenario_names() {
    return {"translations-q1", "translations-q2", "c4-suspension", "so2-suspension",
            "kronecker-compact"};
}

inline Scenario get_scenario(const std::string& name) {
    if (name == "translations-q1") return make_translation_scenario(1);
    if (name == "translations-q2") return make_translation_scenario(2);
    if (name == "c4-suspension") return make_suspension(FiniteRotations{4});
    if (name == "so2-suspension") return make_suspension(IrrationalRotation{1.0});
    if (name == "kronecker-compact") return make_kronecker_compact();
    throw ParameterOutOfRange("unknown scenario '" + name + "'");
}

}  // namespace foliage
