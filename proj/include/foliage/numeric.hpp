#pragma once

#include <functional>
#include <type_traits>

#include "foliage/expression.hpp"
#include "foliage/linalg.hpp"
#include "foliage/tolerances.hpp"

namespace foliage {

/// Central difference with one Richardson extrapolation level.
template <class F>
double central_diff(F&& f, double x, double h = tol::fd_step) {
    const auto d = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
    const double d1 = d(h), d2 = d(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

/// Partial derivative of a scalar field along coordinate k.
template <class F, class = std::enable_if_t<std::is_invocable_v<F&, const Vector&>>>
double fd_partial(F&& f, const Vector& y, int k, double h = tol::fd_step) {
    return central_diff(
        [&](double t) {
            Vector p = y;
            p(k) = t;
            return f(p);
        },
        y(k), h);
}

inline double fd_partial(const Expression& e, const Vector& y, int k, double h = tol::fd_step) {
    return fd_partial([&](const Vector& p) { return eval(e, p); }, y, k, h);
}

/// Mixed second partial d^2 f / (dy_k dy_l), Richardson-extrapolated.
template <class F>
double fd_second(F&& f, const Vector& y, int k, int l, double h = tol::fd_step) {
    return fd_partial([&](const Vector& p) { return fd_partial(f, p, l, h); }, y, k, h);
}

/// Numerical Jacobian of a vector field.
template <class F>
Matrix fd_jacobian(F&& f, const Vector& y, double h = tol::fd_step) {
    const Vector f0 = f(y);
    Matrix j(f0.size(), y.size());
    for (int l = 0; l < y.size(); ++l) {
        for (int k = 0; k < f0.size(); ++k)
            j(k, l) = central_diff(
                [&](double t) {
                    Vector p = y;
                    p(l) = t;
                    return f(p)(k);
                },
                y(l), h);
    }
    return j;
}

}  // namespace foliage
