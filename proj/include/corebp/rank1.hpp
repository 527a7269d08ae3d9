#pragma once

#include <cmath>
#include <stdexcept>

#include "corebp/kernel.hpp"
#include "corebp/poisson.hpp"
#include "corebp/quadrature.hpp"
#include "corebp/solve.hpp"

// Rank-1 power-law machinery. With kappa(x,y) = c/sqrt(xy) the vector fixed
// point collapses to one scalar A solving A = c * f_k(A), where
//
//   f_k(B) = integral_0^1 poisson_tail(k-1, B/sqrt(y)) / sqrt(y) dy
//          = 2B * g_k(B),      g_k(B) = integral_B^inf poisson_tail(k-1, x) x^-2 dx
//
// (the g_k identity needs k >= 3; g_2 diverges at 0 and k = 2 is handled by
// direct quadrature of f_2). The asymptotic core fraction is then
// h_k(A) = 2A^2 * integral_A^inf poisson_tail(k, y) y^-3 dy, and the
// per-type survival profile is beta_x = poisson_tail(k-1, A/sqrt(x)).
// Closed forms below reduce every integral to Poisson tails; an independent
// adaptive-quadrature path exists for each and is used in cross-checks.

namespace corebp {

inline double g_k(int k, double B) {
    if (k < 3) throw std::domain_error("g_k: requires k >= 3");
    if (!(B >= 0.0)) throw std::domain_error("g_k: requires B >= 0");
    // g_3(B) = (1 - e^-B)/B, and each step down in the tail order costs an
    // upper incomplete gamma: g_{j+1}(B) = g_j(B) - (1 - poisson_tail(j-2, B))
    // / ((j-1)(j-2)). At B = 0 this telescopes to g_k(0) = 1/(k-2).
    double g = B == 0.0 ? 1.0 : -std::expm1(-B) / B;
    for (int j = 3; j < k; ++j) {
        g -= (1.0 - poisson_tail(double(j - 2), B)) / double((j - 1) * (j - 2));
    }
    return g;
}

inline double g_k_quadrature(int k, double B) {
    if (k < 3) throw std::domain_error("g_k_quadrature: requires k >= 3");
    if (!(B >= 0.0)) throw std::domain_error("g_k_quadrature: requires B >= 0");
    // Beyond T the tail factor is 1 to machine precision, so the remainder
    // integrates exactly to 1/T.
    const double T = std::fmax(2.0 * B, 60.0 + 10.0 * double(k));
    const auto integrand = [k](double x) {
        if (x == 0.0) return k == 3 ? 0.5 : 0.0;
        return poisson_tail(double(k - 1), x) / (x * x);
    };
    return integrate(integrand, B, T, 1e-13) + 1.0 / T;
}

inline double f_k_quadrature(int k, double B) {
    if (k < 2) throw std::domain_error("f_k_quadrature: requires k >= 2");
    if (!(B >= 0.0)) throw std::domain_error("f_k_quadrature: requires B >= 0");
    if (B == 0.0) return 0.0;
    // Substituting y = u^2 gives f_k(B) = 2 integral_0^1 poisson_tail(k-1,
    // B/u) du. Below u* the tail is 1 to machine precision; integrating the
    // head exactly keeps the relative error of small values near 1e-12.
    const double u_star = std::fmin(1.0, B / (50.0 + 5.0 * double(k)));
    if (u_star >= 1.0) return 2.0;
    const auto integrand = [k, B](double u) {
        return poisson_tail(double(k - 1), B / u);
    };
    return 2.0 * u_star + 2.0 * integrate(integrand, u_star, 1.0, 1e-14);
}

inline double f_k(int k, double B) {
    if (k < 2) throw std::domain_error("f_k: requires k >= 2");
    if (!(B >= 0.0)) throw std::domain_error("f_k: requires B >= 0");
    if (k == 2) return f_k_quadrature(2, B);
    return 2.0 * B * g_k(k, B);
}

inline double h_k(int k, double B) {
    if (k < 3) throw std::domain_error("h_k: closed form requires k >= 3; use h_k_quadrature for k = 2");
    if (!(B >= 0.0)) throw std::domain_error("h_k: requires B >= 0");
    // Integration by parts against y^-3 leaves one Poisson density integral,
    // again an upper incomplete gamma. Limit h_k(B)/(2B^2) -> 1/(2(k-1)(k-2))
    // as B -> 0.
    return poisson_tail(double(k), B) +
           B * B * (1.0 - poisson_tail(double(k - 2), B)) / double((k - 1) * (k - 2));
}

inline double h_k_quadrature(int k, double B) {
    if (k < 2) throw std::domain_error("h_k_quadrature: requires k >= 2");
    if (!(B >= 0.0)) throw std::domain_error("h_k_quadrature: requires B >= 0");
    if (B == 0.0) return 0.0;
    // h_k(B) = 2 integral_0^1 poisson_tail(k, B/u) u du after y = B/u.
    const double u_star = std::fmin(1.0, B / (50.0 + 5.0 * double(k)));
    if (u_star >= 1.0) return 1.0;
    const auto integrand = [k, B](double u) {
        return poisson_tail(double(k), B / u) * u;
    };
    return u_star * u_star + 2.0 * integrate(integrand, u_star, 1.0, 1e-14);
}

namespace detail {

// Raw downward iteration of B -> c f_k(B) from 2c, with no analytic
// threshold knowledge; threshold bisection classifies against this so the
// check is not circular.
inline SolveResult a_rank1_by_iteration(int k, double c,
                                        const FixedPointConfig& cfg) {
    return solve_descending([k, c](double B) { return c * f_k(k, B); }, 2.0 * c,
                            cfg);
}

}  // namespace detail

// Largest fixed point A_k(c) of B -> c f_k(B). Since f_k(B)/B = 2 g_k(B)
// decreases and f_k'(0) = 2/(k-2), a positive root exists iff 2c/(k-2) > 1;
// at or below c = (k-2)/2 the answer is exactly 0 (k >= 3). For k = 2 a
// positive root exists for every c > 0.
inline SolveResult a_rank1(const Rank1PowerLawKernel& kernel, CoreOrder k,
                           FixedPointConfig cfg = {}) {
    kernel.validate();
    cfg.validate();
    if (k.k >= 3 && kernel.c <= 0.5 * double(k.k - 2)) {
        SolveResult r;
        r.value = 0.0;
        r.residual = 0.0;
        r.iterations = 0;
        r.converged = true;
        return r;
    }
    return detail::a_rank1_by_iteration(k.k, kernel.c, cfg);
}

inline SolveResult beta_plus_rank1(const Rank1PowerLawKernel& kernel,
                                   CoreOrder k, FixedPointConfig cfg = {}) {
    SolveResult r = a_rank1(kernel, k, cfg);
    if (r.value > 0.0) {
        r.value = k.k >= 3 ? h_k(k.k, r.value) : h_k_quadrature(2, r.value);
    }
    return r;
}

// Per-type survival probability at type x in (0, 1] given the solved scalar
// fixed point A.
inline double rank1_beta_profile(double A, CoreOrder k, double x) {
    if (!(x > 0.0 && x <= 1.0)) {
        throw std::domain_error("rank1_beta_profile: x must lie in (0, 1]");
    }
    if (!(A >= 0.0)) throw std::domain_error("rank1_beta_profile: A must be >= 0");
    return A > 0.0 ? poisson_tail(double(k.k - 1), A / std::sqrt(x)) : 0.0;
}

inline double rank1_beta_profile(const Rank1PowerLawKernel& kernel, CoreOrder k,
                                 double x, FixedPointConfig cfg = {}) {
    return rank1_beta_profile(a_rank1(kernel, k, cfg).value, k, x);
}

// Bisected emergence threshold in c for k >= 3, classified against the raw
// iteration. For k = 2 there is no threshold (positive for every c > 0).
inline double rank1_threshold(CoreOrder k, double precision = 1e-3,
                              FixedPointConfig cfg = {}) {
    cfg.validate();
    if (k.k < 3) {
        throw std::domain_error("rank1_threshold: no threshold for k = 2");
    }
    if (!(precision > 0.0)) {
        throw std::invalid_argument("rank1_threshold: precision must be positive");
    }
    double lo = 0.0;
    double hi = double(k.k);
    while (hi - lo > precision) {
        const double mid = 0.5 * (lo + hi);
        (detail::a_rank1_by_iteration(k.k, mid, cfg).value > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

// Small-excess laws at the threshold c0 = (k-2)/2, k >= 3: with c =
// (1+eps) c0, A ~ ((k-1)! eps)^(1/(k-2)) and the core fraction is
// (k-1)!^(2/(k-2)) / ((k-1)(k-2)) * eps^(2/(k-2)). Comparison targets only,
// never the solver's answer.
inline double asymptotic_a_rank1(CoreOrder k, double eps) {
    if (k.k < 3) throw std::domain_error("asymptotic_a_rank1: requires k >= 3");
    if (!(eps > 0.0)) throw std::domain_error("asymptotic_a_rank1: requires eps > 0");
    return std::pow(std::tgamma(double(k.k)) * eps, 1.0 / double(k.k - 2));
}

inline double asymptotic_beta_plus(CoreOrder k, double eps) {
    if (k.k < 3) throw std::domain_error("asymptotic_beta_plus: requires k >= 3");
    if (!(eps > 0.0)) throw std::domain_error("asymptotic_beta_plus: requires eps > 0");
    const double expo = 2.0 / double(k.k - 2);
    return std::pow(std::tgamma(double(k.k)), expo) /
           double((k.k - 1) * (k.k - 2)) * std::pow(eps, expo);
}

// k = 2 small-c laws: A_2(c) ~ e^(1-gamma) exp(-1/(2c)) and the 2-core
// fraction ~ (1/2c) e^(2-2gamma) exp(-1/c).
inline double asymptotic_a2(double c) {
    if (!(c > 0.0)) throw std::domain_error("asymptotic_a2: requires c > 0");
    return std::exp(1.0 - kEulerGamma) * std::exp(-1.0 / (2.0 * c));
}

inline double asymptotic_beta_plus2(double c) {
    if (!(c > 0.0)) throw std::domain_error("asymptotic_beta_plus2: requires c > 0");
    return std::exp(2.0 - 2.0 * kEulerGamma) * std::exp(-1.0 / c) / (2.0 * c);
}

}  // namespace corebp
