#pragma once

#include <cmath>
#include <cstddef>

// Adaptive Simpson quadrature. Used only by the cross-check paths
// (*_quadrature functions) that validate the closed-form recurrences,
// so clarity beats speed here.

namespace corebp {

namespace detail {

template <typename F>
double simpson(F&& f, double a, double fa, double b, double fb, double m,
               double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_step(F&& f, double a, double fa, double b, double fb, double m,
                     double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Integrate f over [a, b] to absolute tolerance `tol` (mixed with a relative
// criterion through an initial coarse estimate of the magnitude).
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    // Coarse magnitude estimate so tol acts relatively on large integrals.
    double coarse = 0.0;
    constexpr int kCoarseCells = 16;
    const double h = (b - a) / kCoarseCells;
    for (int i = 0; i < kCoarseCells; ++i) {
        coarse += std::fabs(f(a + (i + 0.5) * h)) * std::fabs(h);
    }
    const double eff_tol = tol * std::fmax(1.0, coarse);

    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
    return detail::adaptive_step(f, a, fa, b, fb, m, fm, whole, eff_tol, 48);
}

}  // namespace corebp
