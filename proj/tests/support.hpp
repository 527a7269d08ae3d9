#pragma once

// Test-only oracles, kept deliberately independent of the library's own
// numerics: term summation instead of incomplete-gamma evaluation, bisection
// instead of fixed-point iteration, subset enumeration instead of peeling.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "corebp/graph.hpp"

namespace oracle {

// P(Po(lambda) >= t) by direct Kahan summation of probabilities. Terms are
// formed in log space so large lambda stays in range.
inline double poisson_tail_sum(std::uint64_t t, double lambda) {
    if (lambda <= 0.0) return t == 0 ? 1.0 : 0.0;
    double sum = 0.0, comp = 0.0;
    const std::uint64_t horizon =
        t + 40 + std::uint64_t(lambda + 12.0 * std::sqrt(lambda) + 40.0);
    for (std::uint64_t j = t; j <= horizon; ++j) {
        const double log_term =
            double(j) * std::log(lambda) - lambda - std::lgamma(double(j) + 1.0);
        const double term = std::exp(log_term);
        const double y = term - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        // terms only decrease once past the mode; never break in the left tail
        if (double(j) > lambda && j > t + 10 && term < 1e-22 * (sum + 1e-300)) break;
    }
    return sum < 1.0 ? sum : 1.0;
}

// Largest fixed point of p = f(p) on (0, 1], or 0 when none exists. Scans
// down from 1 for the first sign change of p - f(p), then bisects it.
inline double max_fixed_point(const std::function<double(double)>& f) {
    const int cells = 4000;
    double hi = 1.0;
    double ghi = hi - f(hi);
    for (int i = 1; i <= cells; ++i) {
        const double lo = 1.0 - double(i) / double(cells);
        const double glo = lo - f(lo);
        if (glo < 0.0 && ghi >= 0.0) {
            double a = lo, b = 1.0 - double(i - 1) / double(cells);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                if (mid - f(mid) < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
        hi = lo;
        ghi = glo;
    }
    return 0.0;
}

// Two-sample Kolmogorov-Smirnov statistic over integer-valued samples given
// as histograms, plus the large-sample critical value at significance alpha.
inline double ks_statistic(const std::vector<std::uint64_t>& a,
                           const std::vector<std::uint64_t>& b) {
    double na = 0.0, nb = 0.0;
    for (const auto c : a) na += double(c);
    for (const auto c : b) nb += double(c);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("ks: empty sample");
    const std::size_t len = std::max(a.size(), b.size());
    double ca = 0.0, cb = 0.0, d = 0.0;
    for (std::size_t v = 0; v < len; ++v) {
        ca += v < a.size() ? double(a[v]) / na : 0.0;
        cb += v < b.size() ? double(b[v]) / nb : 0.0;
        d = std::fmax(d, std::fabs(ca - cb));
    }
    return d;
}

inline double ks_critical(double na, double nb, double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) *
           std::sqrt((na + nb) / (na * nb));
}

// Regularized incomplete beta by continued fraction (Lentz), for the
// Clopper-Pearson interval below.
inline double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const bool swap = x > (a + 1.0) / (a + b + 2.0);
    const double aa = swap ? b : a;
    const double bb = swap ? a : b;
    const double xx = swap ? 1.0 - x : x;
    const double tiny = 1e-300;
    double c = 1.0, d = 1.0 - (aa + bb) * xx / (aa + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const double m2 = 2.0 * m;
        double num = m * (bb - m) * xx / ((aa + m2 - 1.0) * (aa + m2));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(aa + m) * (aa + bb + m) * xx / ((aa + m2) * (aa + m2 + 1.0));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) break;
    }
    const double front = std::exp(ln_front);
    const double value = front * h / aa;
    return swap ? 1.0 - value : value;
}

inline double ibeta_inv(double a, double b, double p) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ibeta(a, b, mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Exact two-sided Clopper-Pearson interval for a binomial proportion.
struct Interval {
    double lo, hi;
};

inline Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials,
                                double alpha) {
    const double s = double(successes), n = double(trials);
    Interval iv{0.0, 1.0};
    if (successes > 0) iv.lo = ibeta_inv(s, n - s + 1.0, alpha / 2.0);
    if (successes < trials) iv.hi = ibeta_inv(s + 1.0, n - s, 1.0 - alpha / 2.0);
    return iv;
}

// The k-core as the union of every vertex subset inducing minimum degree
// >= k. Exponential in n; callers keep n <= 16.
inline std::vector<bool> exhaustive_core_mask(const corebp::Graph& g, int k) {
    if (g.n > 16) throw std::invalid_argument("exhaustive core: n too large");
    const std::uint32_t n = std::uint32_t(g.n);
    std::vector<std::uint32_t> adj_mask(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) {
        for (const std::uint32_t* it = g.neighbors_begin(v); it != g.neighbors_end(v);
             ++it) {
            adj_mask[v] |= std::uint32_t(1) << *it;
        }
    }
    std::uint32_t core = 0;
    for (std::uint32_t subset = 1; subset < (std::uint32_t(1) << n); ++subset) {
        bool ok = true;
        for (std::uint32_t v = 0; v < n && ok; ++v) {
            if (!(subset >> v & 1)) continue;
            ok = std::popcount(adj_mask[v] & subset) >= k;
        }
        if (ok) core |= subset;
    }
    std::vector<bool> mask(n, false);
    for (std::uint32_t v = 0; v < n; ++v) mask[v] = (core >> v & 1) != 0;
    return mask;
}

}  // namespace oracle
