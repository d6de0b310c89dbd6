#pragma once

#include "ucadoa/types.hpp"

#include <utility>

namespace ucadoa {

// Adaptive 2-D Simpson integration of a complex integrand over an axis-aligned
// rectangle. Deliberately shares nothing with the power-series atom evaluator;
// used as its independent cross-check.
namespace detail {

template <class F>
cxd simpson_panel(F& f, double x0, double x1, double y0, double y1) {
    const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
    const double wx[3] = {1.0, 4.0, 1.0};
    const double xs[3] = {x0, xm, x1};
    const double ys[3] = {y0, ym, y1};
    cxd s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += wx[i] * wx[j] * f(xs[i], ys[j]);
    return s * ((x1 - x0) * (y1 - y0) / 36.0);
}

template <class F>
cxd simpson_recurse(F& f, double x0, double x1, double y0, double y1, cxd whole, double tol,
                    int depth) {
    const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
    const cxd q11 = simpson_panel(f, x0, xm, y0, ym);
    const cxd q12 = simpson_panel(f, x0, xm, ym, y1);
    const cxd q21 = simpson_panel(f, xm, x1, y0, ym);
    const cxd q22 = simpson_panel(f, xm, x1, ym, y1);
    const cxd refined = q11 + q12 + q21 + q22;
    if (depth <= 0 || std::abs(refined - whole) <= 10.0 * tol) return refined;
    const double child_tol = tol / 4.0;
    return simpson_recurse(f, x0, xm, y0, ym, q11, child_tol, depth - 1) +
           simpson_recurse(f, x0, xm, ym, y1, q12, child_tol, depth - 1) +
           simpson_recurse(f, xm, x1, y0, ym, q21, child_tol, depth - 1) +
           simpson_recurse(f, xm, x1, ym, y1, q22, child_tol, depth - 1);
}

} // namespace detail

template <class F>
cxd integrate_rectangle(F&& f, double x_lo, double x_hi, double y_lo, double y_hi,
                        double abs_tol, int max_depth = 24) {
    if (x_lo == x_hi || y_lo == y_hi) return 0.0;
    const cxd whole = detail::simpson_panel(f, x_lo, x_hi, y_lo, y_hi);
    return detail::simpson_recurse(f, x_lo, x_hi, y_lo, y_hi, whole, abs_tol, max_depth);
}

} // namespace ucadoa
