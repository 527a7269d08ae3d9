#pragma once

#include <cmath>
#include <stdexcept>

// Poisson tail probabilities through the regularized incomplete gamma
// function: Pr[Po(lambda) >= t] = P(t, lambda) for integer t >= 1, and the
// identity extends to real t > 0. Series expansion for x < a + 1, Lentz
// continued fraction otherwise; both terminate at relative increments below
// 1e-17, which keeps absolute error under 1e-14 across t, lambda <= 1e4.

namespace corebp {
namespace detail {

// log(x^a e^{-x} / Gamma(a)) to ~1e-15 absolute error. The naive three-term
// form loses ~a*eps absolute once a*log(x) and lgamma(a) reach O(a log a),
// which would break the 1e-14 tail contract near a ~ x ~ 1e3. Regrouping
// gives -a*phi(x/a) + log(a/2pi)/2 - S(a) with phi(u) = u - 1 - log(u)
// evaluated by a cancellation-free series and S(a) the Stirling remainder.
inline double log_gamma_prefix(double a, double x) {
    if (a < 10.0) {
        // all three terms are small enough for direct evaluation
        return a * std::log(x) - x - std::lgamma(a);
    }
    const double delta = (x - a) / a;
    double phi;
    if (std::fabs(delta) <= 0.5) {
        // phi = delta^2/2 - delta^3/3 + delta^4/4 - ...
        double pw = delta * delta;
        phi = 0.5 * pw;
        for (int k = 3; k < 200; ++k) {
            pw *= -delta;
            const double term = pw / double(k);
            phi += term;
            if (std::fabs(term) < 1e-18 * phi) break;
        }
    } else {
        phi = delta - std::log1p(delta);
    }
    const double inv_a2 = 1.0 / (a * a);
    const double stirling =
        (1.0 / 12.0 +
         inv_a2 * (-1.0 / 360.0 +
                   inv_a2 * (1.0 / 1260.0 +
                             inv_a2 * (-1.0 / 1680.0 +
                                       inv_a2 * (1.0 / 1188.0 +
                                                 inv_a2 * (-691.0 / 360360.0)))))) /
        a;
    return -a * phi + 0.5 * std::log(a / (2.0 * 3.141592653589793238462643)) -
           stirling;
}

// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw std::domain_error("gamma_p: requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 0.0;

    const double log_prefix = log_gamma_prefix(a, x);

    if (x < a + 1.0) {
        // Series: P(a,x) = prefix * sum_{n>=0} x^n / (a(a+1)...(a+n)).
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < 10000; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
        }
        return std::exp(log_prefix) * sum;
    }

    // Lentz's algorithm for the continued fraction of Q(a,x).
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return 1.0 - std::exp(log_prefix) * h;
}

}  // namespace detail

// poisson_tail(t, lambda) = Pr[Po(lambda) >= t] for real t >= 0.
// Conventions: t = 0 gives 1 (a count is always >= 0); lambda = 0 gives 0
// for t > 0. Negative arguments are rejected.
inline double poisson_tail(double t, double lambda) {
    if (t < 0.0 || lambda < 0.0) {
        throw std::domain_error("poisson_tail: requires t >= 0 and lambda >= 0");
    }
    if (t == 0.0) return 1.0;
    if (lambda == 0.0) return 0.0;
    return detail::gamma_p(t, lambda);
}

}  // namespace corebp
