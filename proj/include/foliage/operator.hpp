#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/expression.hpp"
#include "foliage/interval.hpp"
#include "foliage/linalg.hpp"
#include "foliage/local_map.hpp"
#include "foliage/numeric.hpp"
#include "foliage/tolerances.hpp"

namespace foliage {

// ===================================================================
// Basic differential operators P = sum_{|s|<=m} a_s(y) d^s, with
// complex coefficients stored as (re, im) expression pairs. All the
// bundled examples are real; the imaginary part defaults to zero.
// ===================================================================

struct OperatorTerm {
    std::vector<int> s;  // multi-index, one entry per coordinate
    Expression re;
    Expression im = lit(0.0);

    int order() const {
        int t = 0;
        for (int v : s) t += v;
        return t;
    }
};

enum class OperatorPart { Full, OrderGeOne, OrderOne };

class BasicOperator {
public:
    static BasicOperator make(int q, int m, std::vector<OperatorTerm> terms) {
        if (q < 1) throw ParameterOutOfRange("operator codimension must be positive");
        if (m < 2) throw ParameterOutOfRange("operator order must be at least 2");
        bool top_nonzero = false;
        std::vector<std::vector<int>> seen;
        for (auto& t : terms) {
            if (static_cast<int>(t.s.size()) != q)
                throw ParameterOutOfRange("multi-index length must equal q");
            for (int v : t.s)
                if (v < 0) throw ParameterOutOfRange("multi-index entries must be nonnegative");
            if (t.order() > m) throw ParameterOutOfRange("multi-index order exceeds m");
            if (std::max(max_coord_index(t.re), max_coord_index(t.im)) >= q)
                throw UnboundCoordinate("coefficient uses a coordinate beyond y" +
                                        std::to_string(q));
            if (std::find(seen.begin(), seen.end(), t.s) != seen.end())
                throw ParameterOutOfRange("duplicate multi-index in coefficient table");
            seen.push_back(t.s);
            t.re = simplify(t.re);
            t.im = simplify(t.im);
            if (t.order() == m && !(is_const_value(t.re, 0.0) && is_const_value(t.im, 0.0)))
                top_nonzero = true;
        }
        if (!top_nonzero)
            throw ParameterOutOfRange("every order-m coefficient is the zero expression");
        std::sort(terms.begin(), terms.end(),
                  [](const OperatorTerm& a, const OperatorTerm& b) { return a.s < b.s; });
        BasicOperator p;
        p.q_ = q;
        p.m_ = m;
        p.terms_ = std::move(terms);
        return p;
    }

    int q() const { return q_; }
    int m() const { return m_; }
    const std::vector<OperatorTerm>& terms() const { return terms_; }

    const OperatorTerm* term(const std::vector<int>& s) const {
        for (const auto& t : terms_)
            if (t.s == s) return &t;
        return nullptr;
    }

    bool is_real() const {
        for (const auto& t : terms_)
            if (!is_const_value(t.im, 0.0)) return false;
        return true;
    }

    /// Coefficient a_k of the order-1 part (zero expression when absent).
    Expression one_part_coeff(int k) const {
        std::vector<int> s(static_cast<size_t>(q_), 0);
        s[static_cast<size_t>(k)] = 1;
        const OperatorTerm* t = term(s);
        return t ? t->re : lit(0.0);
    }

private:
    int q_ = 0, m_ = 0;
    std::vector<OperatorTerm> terms_;
};

/// The flat Laplacian on q coordinates.
inline BasicOperator laplacian(int q) {
    std::vector<OperatorTerm> terms;
    for (int k = 0; k < q; ++k) {
        OperatorTerm t;
        t.s.assign(static_cast<size_t>(q), 0);
        t.s[static_cast<size_t>(k)] = 2;
        t.re = lit(1.0);
        terms.push_back(std::move(t));
    }
    return BasicOperator::make(q, 2, std::move(terms));
}

struct ComplexExpression {
    Expression re = lit(0.0);
    Expression im = lit(0.0);

    Complex eval_at(const Vector& y) const { return {eval(re, y), eval(im, y)}; }
};

/// P f over the selected multi-index range (Full, |s|>=1, or |s|=1).
inline ComplexExpression apply_operator(const BasicOperator& p, const Expression& f,
                                        OperatorPart part = OperatorPart::Full) {
    if (max_coord_index(f) >= p.q())
        throw UnboundCoordinate("test function uses a coordinate beyond y" + std::to_string(p.q()));
    ComplexExpression out;
    for (const auto& t : p.terms()) {
        const int o = t.order();
        if (part == OperatorPart::OrderGeOne && o < 1) continue;
        if (part == OperatorPart::OrderOne && o != 1) continue;
        const Expression d = diff(f, t.s);
        out.re = out.re + t.re * d;
        out.im = out.im + t.im * d;
    }
    out.re = simplify(out.re);
    out.im = simplify(out.im);
    return out;
}

// --- principal symbol -------------------------------------------------

/// sigma(P)_z(xi) = sum_{|s|=m} a_s(z) xi^s. Zero covectors give zero.
inline Complex principal_symbol(const BasicOperator& p, const Vector& z, const Vector& xi) {
    Complex acc{0.0, 0.0};
    for (const auto& t : p.terms()) {
        if (t.order() != p.m()) continue;
        double mono = 1.0;
        for (int k = 0; k < p.q(); ++k)
            for (int i = 0; i < t.s[static_cast<size_t>(k)]; ++i) mono *= xi(k);
        acc += Complex{eval(t.re, z), eval(t.im, z)} * mono;
    }
    return acc;
}

/// Alternative route: sigma(P)_z(xi) = (1/m!) (P f^m)|_z for any f with
/// f(z) = 0 and df(z) = xi; here f is the affine function xi . (y - z).
inline Complex principal_symbol_via_function(const BasicOperator& p, const Vector& z,
                                             const Vector& xi) {
    Expression f = lit(0.0);
    for (int k = 0; k < p.q(); ++k) f = f + lit(xi(k)) * (coord(k) - lit(z(k)));
    const ComplexExpression pf = apply_operator(p, pow(simplify(f), p.m()));
    double fact = 1.0;
    for (int i = 2; i <= p.m(); ++i) fact *= i;
    return pf.eval_at(z) / fact;
}

// --- transverse ellipticity -------------------------------------------

/// Deterministic sample of the unit sphere in R^q (lexicographic order).
inline std::vector<Vector> unit_sphere_points(int q, int n) {
    std::vector<Vector> pts;
    if (q == 1) {
        Vector a(1), b(1);
        a << 1.0;
        b << -1.0;
        return {a, b};
    }
    // spherical angles: the last angle sweeps the full circle
    std::vector<int> idx(static_cast<size_t>(q - 1), 0);
    while (true) {
        std::vector<double> ang(static_cast<size_t>(q - 1));
        for (int k = 0; k + 1 < q - 1; ++k)
            ang[static_cast<size_t>(k)] = (idx[static_cast<size_t>(k)] + 1) * M_PI / (n + 1);
        ang[static_cast<size_t>(q - 2)] = idx[static_cast<size_t>(q - 2)] * 2.0 * M_PI / n;
        Vector v(q);
        double sines = 1.0;
        for (int k = 0; k < q - 1; ++k) {
            v(k) = sines * std::cos(ang[static_cast<size_t>(k)]);
            sines *= std::sin(ang[static_cast<size_t>(k)]);
        }
        v(q - 1) = sines;
        pts.push_back(v);
        int k = q - 2;
        while (k >= 0 && ++idx[static_cast<size_t>(k)] == n) {
            idx[static_cast<size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return pts;
}

struct EllipticityResult {
    bool elliptic = false;
    double min_abs_symbol = 0.0;
    Vector witness_z, witness_xi;  // set when not elliptic
};

/// Sampled certificate (not a proof): scans a grid of the region times a
/// sphere sample and reports the first (z, xi) with |sigma| below tau.
inline EllipticityResult check_transverse_ellipticity(const BasicOperator& p, const Box& region,
                                                      int grid_n, int sphere_n,
                                                      double tau = tol::ellipticity) {
    if (grid_n < 2 || sphere_n < 2) throw ParameterOutOfRange("grid_n and sphere_n must be >= 2");
    EllipticityResult r;
    r.min_abs_symbol = std::numeric_limits<double>::infinity();
    const auto xs = unit_sphere_points(p.q(), sphere_n);
    for (const auto& zp : interior_grid(region, grid_n)) {
        const Vector z = to_vector(zp);
        for (const auto& xi : xs) {
            const double a = std::abs(principal_symbol(p, z, xi));
            r.min_abs_symbol = std::min(r.min_abs_symbol, a);
            if (a < tau) {
                r.elliptic = false;
                r.witness_z = z;
                r.witness_xi = xi;
                return r;
            }
        }
    }
    r.elliptic = true;
    return r;
}

/// Exact route for real order-2 operators: the symbol is the quadratic
/// form of a symmetric coefficient matrix, elliptic iff that matrix is
/// definite. Returns the eigenvalue of smallest magnitude.
inline std::pair<bool, double> ellipticity_by_eigenvalues(const BasicOperator& p, const Vector& z,
                                                          double tau = tol::ellipticity) {
    if (p.m() != 2 || !p.is_real())
        throw ParameterOutOfRange("eigenvalue route needs a real operator of order 2");
    const int q = p.q();
    Matrix quad = Matrix::Zero(q, q);
    for (const auto& t : p.terms()) {
        if (t.order() != 2) continue;
        int first = -1, second = -1;
        for (int k = 0; k < q; ++k)
            for (int i = 0; i < t.s[static_cast<size_t>(k)]; ++i) {
                if (first < 0)
                    first = k;
                else
                    second = k;
            }
        const double v = eval(t.re, z);
        if (first == second) {
            quad(first, first) += v;
        } else {
            quad(first, second) += 0.5 * v;
            quad(second, first) += 0.5 * v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(quad);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    const double min_abs = std::min(std::abs(lo), std::abs(hi));
    const bool definite = (lo > tau) || (hi < -tau);
    return {definite, definite ? min_abs : std::min(std::abs(lo), std::abs(hi))};
}

// --- triangular 1-part --------------------------------------------------

/// Matrix d(a_1..a_q)/d(y_1..y_q) of the order-1 coefficients at z.
inline Matrix one_part_matrix(const BasicOperator& p, const Vector& z) {
    const int q = p.q();
    for (int k = 0; k < q; ++k) {
        std::vector<int> s(static_cast<size_t>(q), 0);
        s[static_cast<size_t>(k)] = 1;
        const OperatorTerm* t = p.term(s);
        if (t && !is_const_value(t->im, 0.0))
            throw ParameterOutOfRange("triangularity check supports real 1-parts only");
    }
    Matrix a(q, q);
    for (int k = 0; k < q; ++k) {
        const Expression ak = p.one_part_coeff(k);
        for (int l = 0; l < q; ++l) a(k, l) = eval(diff(ak, l), z);
    }
    return a;
}

enum class TriangularVerdict { Diagonal, Lower, Upper, No };

inline bool is_triangular(TriangularVerdict v) { return v != TriangularVerdict::No; }

/// Triangularity of the 1-part over a grid of the box; Diagonal counts
/// as triangular.
inline TriangularVerdict one_part_verdict(const BasicOperator& p, const Box& region, int grid_n,
                                          double tau = tol::triangular) {
    double above = 0.0, below = 0.0;  // max |entry| strictly above/below the diagonal
    for (const auto& zp : interior_grid(region, grid_n)) {
        const Matrix a = one_part_matrix(p, to_vector(zp));
        for (int k = 0; k < p.q(); ++k)
            for (int l = 0; l < p.q(); ++l) {
                if (k < l) above = std::max(above, std::abs(a(k, l)));
                if (k > l) below = std::max(below, std::abs(a(k, l)));
            }
    }
    if (above <= tau && below <= tau) return TriangularVerdict::Diagonal;
    if (above <= tau) return TriangularVerdict::Lower;
    if (below <= tau) return TriangularVerdict::Upper;
    return TriangularVerdict::No;
}

/// True when every coefficient is constant: decided symbolically where the
/// derivative simplifies to zero, by dense sampling otherwise.
inline bool has_constant_coefficients(const BasicOperator& p, const Box& region, int grid_n = 5) {
    for (const auto& t : p.terms()) {
        for (const Expression* c : {&t.re, &t.im}) {
            bool symbolic_const = true;
            for (int k = 0; k < p.q(); ++k)
                if (!is_zero_expression(diff(*c, k))) symbolic_const = false;
            if (symbolic_const) continue;
            const double ref = eval(*c, to_vector(region.center()));
            for (const auto& zp : interior_grid(region, grid_n))
                if (std::abs(eval(*c, to_vector(zp)) - ref) > 1e-12) return false;
        }
    }
    return true;
}

// --- quasi-analyticity determinant ---------------------------------------

/// Determinant of the first-variation top-order matrix: sigma(P)_w(eta) on
/// the diagonal, -(a_{kl} o phi)(w) off the diagonal.
inline Complex char_matrix_det(const BasicOperator& p, const LocalMap& phi, const Vector& w,
                               const Vector& eta) {
    if (eta.cwiseAbs().maxCoeff() == 0.0) throw ZeroCovector();
    if (!phi.contains(w)) throw DomainError("char_matrix_det: w outside dom(phi)");
    const int q = p.q();
    const Vector fw = phi.apply_unchecked(w);
    const Complex sym = principal_symbol(p, w, eta);
    CMatrix l(q, q);
    for (int k = 0; k < q; ++k) {
        const Expression ak = p.one_part_coeff(k);
        for (int col = 0; col < q; ++col) {
            if (col == k) {
                l(k, k) = sym;
            } else {
                l(k, col) = Complex{-eval(diff(ak, col), fw), 0.0};
            }
        }
    }
    return l.determinant();
}

// --- zero-order cancellation ---------------------------------------------

/// max over a grid of |b0(psi(y)) - a0(y)|, the two zero-order coefficients.
inline double zero_order_cancellation(const BasicOperator& p_src, const BasicOperator& p_dst,
                                      const LocalMap& psi, int grid_n) {
    const std::vector<int> zero_idx(static_cast<size_t>(p_src.q()), 0);
    const OperatorTerm* a0 = p_src.term(zero_idx);
    const OperatorTerm* b0 = p_dst.term(zero_idx);
    const auto value = [&](const OperatorTerm* t, const Vector& y) {
        return t ? Complex{eval(t->re, y), eval(t->im, y)} : Complex{0.0, 0.0};
    };
    double worst = 0.0;
    for (const auto& yp : interior_grid(psi.dom, grid_n)) {
        const Vector y = to_vector(yp);
        worst = std::max(worst, std::abs(value(b0, psi.apply_unchecked(y)) - value(a0, y)));
    }
    return worst;
}

// --- symbol invariance ------------------------------------------------------

/// |sigma(P_src)_{psi^{-1}(z)}(psi^* xi) - sigma(P_dst)_z(xi)| for z in im(psi).
inline double symbol_invariance_residual(const BasicOperator& p_src, const BasicOperator& p_dst,
                                         const LocalMap& psi, const Vector& z, const Vector& xi) {
    const Vector w = psi.apply_inverse(z);
    const Matrix j = psi.jacobian_unchecked(w);
    const Vector pullback = j.transpose() * xi;
    return std::abs(principal_symbol(p_src, w, pullback) - principal_symbol(p_dst, z, xi));
}

// --- coordinate-change rule for the 1-part (q = 2) ---------------------------

/// Right side of the displayed identity: J Da J^{-1} + H J^{-1}, the
/// 1-part matrix after the change of coordinates phi, evaluated at phi(z).
/// Hessians of phi are finite differences.
inline Matrix one_part_after_change(const std::array<Expression, 2>& a,
                                    const std::vector<Expression>& phi_fwd, const Vector& z) {
    if (phi_fwd.size() != 2) throw ParameterOutOfRange("the displayed identity is two-dimensional");
    Matrix j(2, 2);
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) j(k, l) = eval(diff(phi_fwd[static_cast<size_t>(k)], l), z);
    if (std::abs(j.determinant()) < 1e-10) throw SingularJacobian();
    const Matrix jinv = j.inverse();
    Matrix da(2, 2), h(2, 2);
    Vector av(2);
    av << eval(a[0], z), eval(a[1], z);
    // nested central differences amplify rounding noise; a coarser step
    // keeps the Hessian at ~1e-10 noise while staying exact for quadratics
    const double hess_step = 2e-3;
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            da(k, l) = eval(diff(a[static_cast<size_t>(k)], l), z);
            double acc = 0.0;
            for (int m = 0; m < 2; ++m)
                acc += fd_second(
                           [&](const Vector& y) { return eval(phi_fwd[static_cast<size_t>(k)], y); },
                           z, l, m, hess_step) *
                       av(m);
            h(k, l) = acc;
        }
    return j * da * jinv + h * jinv;
}

inline Matrix one_part_after_change(const std::array<Expression, 2>& a, const LocalMap& phi,
                                    const Vector& z) {
    return one_part_after_change(a, phi.fwd, z);
}

/// Stock nonlinear coordinate change with a closed-form inverse:
/// (y1, y2) -> L (y1 + alpha y2^2, y2 + beta (y1 + alpha y2^2)^2).
/// The unipotent factors invert exactly, so the whole map does.
inline LocalMap make_quadratic_change(double alpha, double beta, const Matrix& l, const Box& dom,
                                      const std::string& chart = "O") {
    if (l.rows() != 2 || l.cols() != 2 || std::abs(l.determinant()) < 1e-10)
        throw SingularJacobian("linear part must be an invertible 2x2 matrix");
    const Expression y1 = coord(0), y2 = coord(1);
    const Expression w1 = y1 + lit(alpha) * pow(y2, 2);
    const Expression w2 = y2 + lit(beta) * pow(w1, 2);
    std::vector<Expression> fwd = {simplify(lit(l(0, 0)) * w1 + lit(l(0, 1)) * w2),
                                   simplify(lit(l(1, 0)) * w1 + lit(l(1, 1)) * w2)};
    const Matrix li = l.inverse();
    const Expression v1 = lit(li(0, 0)) * y1 + lit(li(0, 1)) * y2;
    const Expression v2 = lit(li(1, 0)) * y1 + lit(li(1, 1)) * y2;
    const Expression u2back = v2 - lit(beta) * pow(v1, 2);
    std::vector<Expression> inv = {simplify(v1 - lit(alpha) * pow(u2back, 2)), simplify(u2back)};
    Box codom = dom;
    for (size_t k = 0; k < 2; ++k) codom.iv[k] = eval_interval(fwd[k], dom);
    return LocalMap::make(dom, codom, std::move(fwd), std::move(inv), chart, chart);
}

/// Independent route: push the 1-part forward (b(phi(y)) = J(phi) a(y)),
/// then differentiate b in the new coordinates by finite differences
/// through the declared inverse. Returns the max-abs entry difference
/// against one_part_after_change.
inline double verify_coordinate_change_rule(const std::array<Expression, 2>& a, const LocalMap& phi,
                                            const Vector& z) {
    if (phi.dim() != 2) throw ParameterOutOfRange("the displayed identity is two-dimensional");
    const Matrix right = one_part_after_change(a, phi, z);
    const auto b_in_new_coords = [&](const Vector& ytilde) -> Vector {
        const Vector y = phi.apply_inverse(ytilde);
        Vector av(2);
        av << eval(a[0], y), eval(a[1], y);
        return phi.jacobian_unchecked(y) * av;
    };
    const Matrix left = fd_jacobian(b_in_new_coords, phi.apply_unchecked(z));
    return max_abs_diff(left, right);
}

}  // namespace foliage
