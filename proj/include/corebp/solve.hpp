#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "corebp/kernel.hpp"
#include "corebp/poisson.hpp"

// Fixed-point solvers for the survival probabilities behind asymptotic k-core
// sizes. beta_uniform(k, lambda) is the probability that the Poisson(lambda)
// branching tree contains an infinite (k-1)-ary subtree at the root: the
// maximum solution of p = poisson_tail(k-1, lambda*p), reached by iterating
// downward from 1. beta_plus composes one more tail step (the root needs k
// qualifying children, not k-1) and equals the asymptotic k-core fraction.

namespace corebp {

struct CoreOrder {
    int k;
    CoreOrder(int k_) : k(k_) {
        if (k < 2) throw std::domain_error("CoreOrder: k must be >= 2");
    }
};

struct FixedPointConfig {
    double tolerance = 1e-12;
    std::size_t max_iterations = 1000000;
    double positivity_cutoff = 1e-9;

    void validate() const {
        if (!(tolerance > 0.0)) {
            throw std::invalid_argument("FixedPointConfig: tolerance must be positive");
        }
        if (!(positivity_cutoff > tolerance)) {
            throw std::invalid_argument(
                "FixedPointConfig: positivity_cutoff must exceed tolerance");
        }
        if (max_iterations < 1) {
            throw std::invalid_argument("FixedPointConfig: max_iterations must be >= 1");
        }
    }
};

struct SolveResult {
    double value = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    // Set when the final per-step gap ratio exceeds 1 - 1e-4: the parameter
    // sits close to a critical point and the reported side may be fragile.
    bool near_critical = false;
};

struct VectorSolveResult {
    std::vector<double> values;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool near_critical = false;
};

namespace detail {

constexpr double kNearCriticalRatio = 1.0 - 1e-4;

// Per-step decay rate of the gap sequence, measured as a geometric mean over
// a window. Single-step ratios are useless near criticality: there the rate
// is 1 - O(1e-5) while the gaps themselves are differences of ~1e-12 between
// ~0.5-sized iterates, so one step carries ~1e-4 of subtraction noise.
class RateEstimator {
public:
    void record(double gap) {
        const std::size_t slot = count_ % kWindow;
        if (gap > 0.0) {
            if (count_ >= kWindow && ring_[slot] > 0.0) {
                rate_ = std::pow(gap / ring_[slot], 1.0 / double(kWindow));
            } else if (prev_ > 0.0) {
                rate_ = gap / prev_;
            }
        }
        ring_[slot] = gap;
        prev_ = gap;
        ++count_;
    }

    double rate() const { return rate_; }
    bool near_critical() const { return rate_ > kNearCriticalRatio; }

private:
    static constexpr std::size_t kWindow = 64;
    double ring_[kWindow] = {};
    double prev_ = -1.0;
    double rate_ = 0.0;
    std::size_t count_ = 0;
};

// Monotone descending fixed-point iteration. Requires f nondecreasing with
// f(start) <= start, so iterates decrease toward the largest fixed point
// below start. A value under positivity_cutoff snaps to the exact fixed
// point 0 (all maps here satisfy f(0) = 0). On a converged exit the reported
// value is the iterate whose forward gap was just measured, so the residual
// bound holds by construction rather than by a second marginal comparison.
template <typename F>
SolveResult solve_descending(F&& f, double start, const FixedPointConfig& cfg) {
    SolveResult r;
    double p = start;
    RateEstimator rate;
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        const double next = f(p);
        const double gap = p - next;
        rate.record(gap);
        if (next < cfg.positivity_cutoff) {
            r.value = 0.0;
            r.residual = std::fabs(f(0.0));
            r.iterations = it;
            r.converged = r.residual <= cfg.tolerance;
            r.near_critical = rate.near_critical();
            return r;
        }
        if (gap <= cfg.tolerance) {
            r.value = p;
            r.residual = std::fabs(gap);
            r.iterations = it;
            r.converged = true;
            r.near_critical = rate.near_critical();
            return r;
        }
        p = next;
    }
    r.value = p;
    r.residual = std::fabs(p - f(p));
    r.iterations = cfg.max_iterations;
    r.converged = false;
    r.near_critical = rate.near_critical();
    return r;
}

}  // namespace detail

inline SolveResult beta_uniform(CoreOrder k, double lambda,
                                FixedPointConfig cfg = {}) {
    cfg.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("beta_uniform: lambda must be finite and nonnegative");
    }
    if (k.k == 2 && lambda <= 1.0) {
        // k = 2 asks for plain survival of the Poisson(lambda) tree, which
        // fails a.s. at or below the critical mean 1. The iteration itself
        // decays like 2/d at lambda = 1 and would stall short of the cutoff.
        SolveResult r;
        r.value = 0.0;
        r.residual = 0.0;
        r.iterations = 0;
        r.converged = true;
        r.near_critical = std::fabs(lambda - 1.0) < 1e-6;
        return r;
    }
    const double t = double(k.k - 1);
    return detail::solve_descending(
        [&](double p) { return poisson_tail(t, lambda * p); }, 1.0, cfg);
}

// d-th iterate of p -> poisson_tail(k-1, lambda*p) started at 1. This equals
// the probability that the branching tree contains a depth-d (k-1)-ary
// subtree at the root, and is the analytic target for the Monte-Carlo
// estimators; no cutoff or snapping is applied.
inline double iterate_B(CoreOrder k, double lambda, std::size_t d) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("iterate_B: lambda must be finite and nonnegative");
    }
    double p = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        p = poisson_tail(double(k.k - 1), lambda * p);
    }
    return p;
}

inline SolveResult beta_plus_uniform(CoreOrder k, double lambda,
                                     FixedPointConfig cfg = {}) {
    SolveResult r = beta_uniform(k, lambda, cfg);
    // residual, iterations and flags describe the underlying beta solve
    r.value = r.value > 0.0 ? poisson_tail(double(k.k), lambda * r.value) : 0.0;
    return r;
}

// Emergence threshold lambda_c(k) = inf{lambda : beta > 0}. Exact 1 for
// k = 2; bisection on the solver's positivity classification otherwise,
// resolved to sqrt(tolerance). The jump of beta at the threshold (k >= 3)
// makes the classification robust.
inline double lambda_c(CoreOrder k, FixedPointConfig cfg = {}) {
    cfg.validate();
    if (k.k == 2) return 1.0;
    const auto positive = [&](double lam) {
        return beta_uniform(k, lam, cfg).value > 0.0;
    };
    double lo = 1.0;
    double hi = 2.0 * double(k.k);
    while (!positive(hi)) hi *= 2.0;
    const double precision = std::sqrt(cfg.tolerance);
    while (hi - lo > precision) {
        const double mid = 0.5 * (lo + hi);
        (positive(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

// mean_i = sum_j kappa[i][j] mu[j] beta[j], the offspring mean seen by a
// type-i particle.
inline void finite_type_means(const FiniteTypeKernel& kernel,
                              const std::vector<double>& beta,
                              std::vector<double>& means) {
    const std::size_t r = kernel.r();
    means.assign(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < r; ++j) {
            mean += kernel.kappa[i][j] * kernel.mu[j] * beta[j];
        }
        means[i] = mean;
    }
}

inline void finite_type_map(const FiniteTypeKernel& kernel, int k,
                            const std::vector<double>& beta,
                            std::vector<double>& out,
                            std::vector<double>& means) {
    finite_type_means(kernel, beta, means);
    out.resize(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        out[i] = poisson_tail(double(k - 1), means[i]);
    }
}

}  // namespace detail

// Vector analogue of beta_uniform: beta_i = poisson_tail(k-1, mean_i),
// iterated coordinatewise downward from the all-ones vector. Coordinates
// falling below positivity_cutoff snap to 0.
inline VectorSolveResult beta_finite_type(const FiniteTypeKernel& kernel,
                                          CoreOrder k,
                                          FixedPointConfig cfg = {}) {
    kernel.validate();
    cfg.validate();
    const std::size_t r = kernel.r();

    VectorSolveResult res;
    std::vector<double> beta(r, 1.0), next(r), means, check;
    detail::RateEstimator rate;
    // The residual is measured against the map actually iterated, i.e. with
    // the cutoff snap applied: a coordinate held at 0 while its raw image is
    // a sub-cutoff positive value counts as exactly fixed. Without this, a
    // weakly coupled type that snaps while others stay supercritical would
    // keep the raw residual pinned near the cutoff forever.
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        detail::finite_type_map(kernel, k.k, beta, next, means);
        bool all_zero = true;
        double gap = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            if (next[i] < cfg.positivity_cutoff) next[i] = 0.0;
            if (next[i] != 0.0) all_zero = false;
            gap = std::fmax(gap, std::fabs(beta[i] - next[i]));
        }
        rate.record(gap);
        res.near_critical = rate.near_critical();
        res.iterations = it;
        if (all_zero) {
            // 0 is an exact fixed point: every mean vanishes.
            res.values.assign(r, 0.0);
            res.residual = 0.0;
            res.converged = true;
            return res;
        }
        if (gap <= cfg.tolerance) {
            // gap is exactly the snapped-map residual of beta
            res.values = beta;
            res.residual = gap;
            res.converged = true;
            return res;
        }
        beta.swap(next);
    }
    detail::finite_type_map(kernel, k.k, beta, check, means);
    double residual = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        if (check[i] < cfg.positivity_cutoff) check[i] = 0.0;
        residual = std::fmax(residual, std::fabs(beta[i] - check[i]));
    }
    res.values = beta;
    res.residual = residual;
    res.converged = false;
    return res;
}

// d-th coordinatewise iterate from all ones, with no cutoff: the analytic
// target for the multi-type Monte-Carlo estimator.
inline std::vector<double> iterate_beta_finite_type(const FiniteTypeKernel& kernel,
                                                    CoreOrder k, std::size_t d) {
    kernel.validate();
    std::vector<double> beta(kernel.r(), 1.0), next, means;
    for (std::size_t i = 0; i < d; ++i) {
        detail::finite_type_map(kernel, k.k, beta, next, means);
        beta.swap(next);
    }
    return beta;
}

// Asymptotic core fraction sum_i mu_i poisson_tail(k, mean_i) at the solved
// beta vector. residual, iterations and flags describe the underlying solve.
inline SolveResult beta_plus_finite_type(const FiniteTypeKernel& kernel,
                                         CoreOrder k,
                                         FixedPointConfig cfg = {}) {
    const VectorSolveResult inner = beta_finite_type(kernel, k, cfg);
    SolveResult r;
    r.residual = inner.residual;
    r.iterations = inner.iterations;
    r.converged = inner.converged;
    r.near_critical = inner.near_critical;

    bool all_zero = true;
    for (const double b : inner.values) {
        if (b != 0.0) all_zero = false;
    }
    if (all_zero) {
        r.value = 0.0;
        return r;
    }
    std::vector<double> means;
    detail::finite_type_means(kernel, inner.values, means);
    double total = 0.0;
    for (std::size_t i = 0; i < kernel.r(); ++i) {
        total += kernel.mu[i] * poisson_tail(double(k.k), means[i]);
    }
    r.value = total;
    return r;
}

}  // namespace corebp
