#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "corebp/kernel.hpp"
#include "corebp/rng.hpp"
#include "corebp/solve.hpp"

// Monte-Carlo estimation of branching-process tree events, independent of
// the fixed-point solvers it validates. A trial realizes a Poisson offspring
// tree lazily: every node's offspring counts are a deterministic function of
// the node's 64-bit key, and child keys derive from the parent key and child
// ordinal. Fixing the seed therefore fixes one infinite tree per trial, so
// estimates at depths d and d+1 evaluate nested events on the same
// realization and inherit monotonicity exactly. Evaluation recurses
// depth-first with short-circuiting: a node at remaining depth j succeeds
// iff at least k-1 of its children succeed at depth j-1 (depth 0 always
// succeeds); the root needs k-1 for the embedded-tree event and k for the
// core-membership variant. Trials whose node count exceeds particle_cap
// abort, are counted, and are excluded from the estimate.

namespace corebp {

struct BPConfig {
    std::size_t depth = 0;
    std::size_t samples = 1;
    std::uint64_t particle_cap = 10000000;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (samples < 1) throw std::invalid_argument("BPConfig: samples must be >= 1");
        if (particle_cap < 1) {
            throw std::invalid_argument("BPConfig: particle_cap must be >= 1");
        }
    }
};

struct BPEstimate {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    std::uint64_t aborts = 0;
    double estimate = 0.0;
    double std_error = 0.0;
};

namespace detail {

enum class BPOutcome { success, failure, abort };

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t child_key(std::uint64_t key, std::uint64_t ordinal) {
    return mix64(key + kGolden * (ordinal + 1));
}

struct BPEvaluator {
    const FiniteTypeKernel* kernel;
    int k;
    std::uint64_t particle_cap;
    // samplers[i][j]: offspring count of type j under a type-i parent,
    // Poisson with mean kappa[i][j] * mu[j]
    std::vector<std::vector<PoissonSampler>> samplers;
    // one offspring-count row per tree level, so recursion never allocates
    std::vector<std::vector<std::uint64_t>> counts_by_depth;

    BPEvaluator(const FiniteTypeKernel& kern, int k_, std::uint64_t cap,
                std::size_t max_depth)
        : kernel(&kern), k(k_), particle_cap(cap) {
        const std::size_t r = kern.r();
        samplers.resize(r);
        for (std::size_t i = 0; i < r; ++i) {
            samplers[i].reserve(r);
            for (std::size_t j = 0; j < r; ++j) {
                samplers[i].emplace_back(kern.kappa[i][j] * kern.mu[j]);
            }
        }
        counts_by_depth.assign(max_depth + 1, std::vector<std::uint64_t>(r, 0));
    }

    BPOutcome evaluate(std::uint64_t key, std::uint32_t type,
                       std::size_t remaining_depth, std::uint64_t needed,
                       std::uint64_t& used) {
        if (++used > particle_cap) return BPOutcome::abort;
        if (remaining_depth == 0) return BPOutcome::success;

        Xoshiro256 rng(key);
        const std::size_t r = kernel->r();
        // Offspring counts are drawn eagerly (they define the realization);
        // children themselves are expanded only until the event is decided.
        std::vector<std::uint64_t>& counts = counts_by_depth[remaining_depth];
        std::uint64_t total = 0;
        for (std::size_t j = 0; j < r; ++j) {
            counts[j] = std::uint64_t(samplers[type][j](rng));
            total += counts[j];
        }
        if (total < needed) return BPOutcome::failure;

        std::uint64_t succ = 0;
        std::uint64_t ordinal = 0;
        for (std::size_t j = 0; j < r; ++j) {
            const std::uint64_t here = counts[j];
            for (std::uint64_t c = 0; c < here; ++c, ++ordinal) {
                if (succ >= needed) return BPOutcome::success;
                if (succ + (total - ordinal) < needed) return BPOutcome::failure;
                const BPOutcome out =
                    evaluate(child_key(key, ordinal), std::uint32_t(j),
                             remaining_depth - 1, std::uint64_t(k - 1), used);
                if (out == BPOutcome::abort) return BPOutcome::abort;
                if (out == BPOutcome::success) ++succ;
            }
        }
        return succ >= needed ? BPOutcome::success : BPOutcome::failure;
    }
};

// root_type < 0 draws the root's type from mu per trial, off a stream that
// leaves the node keys untouched (so a fixed root type stays bit-identical
// across the one-type and multi-type entry points).
inline BPEstimate run_trials(const FiniteTypeKernel& kernel, int k,
                             std::uint64_t root_needed, int root_type,
                             const BPConfig& cfg) {
    cfg.validate();
    kernel.validate();
    if (root_type >= 0 && std::size_t(root_type) >= kernel.r()) {
        throw std::invalid_argument("bp: root_type out of range");
    }

    std::vector<double> mu_cdf(kernel.r(), 0.0);
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < kernel.r(); ++i) {
            acc += kernel.mu[i];
            mu_cdf[i] = acc;
        }
    }

    const auto run_range = [&](std::size_t begin, std::size_t end,
                               std::uint64_t& successes, std::uint64_t& aborts) {
        BPEvaluator eval(kernel, k, cfg.particle_cap, cfg.depth);
        for (std::size_t t = begin; t < end; ++t) {
            const std::uint64_t root_key = stream_seed(cfg.seed, t);
            std::uint32_t type = std::uint32_t(root_type >= 0 ? root_type : 0);
            if (root_type < 0) {
                Xoshiro256 type_rng(mix64(root_key ^ 0x7f4a7c159e3779b9ULL));
                const double u = type_rng.uniform();
                while (type + 1 < kernel.r() && u >= mu_cdf[type]) ++type;
            }
            std::uint64_t used = 0;
            const BPOutcome out =
                eval.evaluate(root_key, type, cfg.depth, root_needed, used);
            if (out == BPOutcome::success) ++successes;
            if (out == BPOutcome::abort) ++aborts;
        }
    };

    BPEstimate est;
    est.trials = cfg.samples;
    const unsigned threads = std::max(
        1u, std::min<unsigned>(cfg.threads, unsigned(std::min<std::size_t>(
                                                cfg.samples, 1024))));
    if (threads == 1) {
        run_range(0, cfg.samples, est.successes, est.aborts);
    } else {
        std::vector<std::uint64_t> succ(threads, 0), abrt(threads, 0);
        std::vector<std::thread> workers;
        workers.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                run_range(cfg.samples * w / threads, cfg.samples * (w + 1) / threads,
                          succ[w], abrt[w]);
            });
        }
        for (auto& th : workers) th.join();
        for (unsigned w = 0; w < threads; ++w) {
            est.successes += succ[w];
            est.aborts += abrt[w];
        }
    }

    const std::uint64_t effective = est.trials - est.aborts;
    if (effective == 0) {
        est.estimate = std::numeric_limits<double>::quiet_NaN();
        est.std_error = std::numeric_limits<double>::quiet_NaN();
    } else {
        est.estimate = double(est.successes) / double(effective);
        est.std_error =
            std::sqrt(est.estimate * (1.0 - est.estimate) / double(effective));
    }
    return est;
}

inline FiniteTypeKernel one_type_kernel(double lambda) {
    FiniteTypeKernel kern;
    kern.kappa = {{lambda}};
    kern.mu = {1.0};
    return kern;
}

}  // namespace detail

// Probability that the Poisson(lambda) tree contains a depth-d (k-1)-ary
// subtree at the root; analytic target iterate_B(k, lambda, d).
inline BPEstimate estimate_B_d(CoreOrder k, double lambda, const BPConfig& cfg) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("estimate_B_d: lambda must be finite and nonnegative");
    }
    return detail::run_trials(detail::one_type_kernel(lambda), k.k,
                              std::uint64_t(k.k - 1), 0, cfg);
}

// Core-membership variant: the root itself needs k qualifying children.
// Analytic target poisson_tail(k, lambda * iterate_B(k, lambda, d - 1)).
inline BPEstimate estimate_Bplus_d(CoreOrder k, double lambda, const BPConfig& cfg) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("estimate_Bplus_d: lambda must be finite and nonnegative");
    }
    if (cfg.depth < 1) throw std::invalid_argument("estimate_Bplus_d: depth must be >= 1");
    return detail::run_trials(detail::one_type_kernel(lambda), k.k,
                              std::uint64_t(k.k), 0, cfg);
}

// Multi-type variant: a type-i node begets Poisson(kappa[i][j] mu[j])
// children of each type j. root_type = -1 draws the root's type from mu;
// analytic target is coordinate root_type of iterate_beta_finite_type (or
// its mu-mixture).
inline BPEstimate estimate_B_d_multitype(const FiniteTypeKernel& kernel, CoreOrder k,
                                         int root_type, const BPConfig& cfg) {
    return detail::run_trials(kernel, k.k, std::uint64_t(k.k - 1), root_type, cfg);
}

// Depth-d approximation of the root degree law inside the core-coupled tree:
// the number of the root's children with the depth-(d-1) subtree property,
// conditioned on at least k of them. Child survival is estimated by a
// level-wise particle cascade (population max(samples, 10^6) per level)
// rather than per-child recursive evaluation, whose cost would grow like
// (k-1)^d; conditioning rejections are reported, never silently resampled.
struct CoreDegreeHistogram {
    std::map<std::uint64_t, std::uint64_t> counts;  // surviving-child count -> rows
    std::uint64_t conditioned = 0;  // recorded rows (target: cfg.samples)
    std::uint64_t rejected = 0;     // root trials with fewer than k survivors
    std::uint64_t aborts = 0;       // kept for the estimator contract; the cascade never aborts
    double child_survival = 0.0;         // cascade estimate at depth d-1
    double child_survival_deeper = 0.0;  // same at depth d+4, a convergence diagnostic
};

inline CoreDegreeHistogram sample_core_root_degree(CoreOrder k, double lambda,
                                                   std::size_t d, BPConfig cfg) {
    cfg.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error(
            "sample_core_root_degree: lambda must be finite and nonnegative");
    }
    if (d < 2) throw std::invalid_argument("sample_core_root_degree: requires d >= 2");

    const std::uint64_t population = std::max<std::uint64_t>(cfg.samples, 1000000);
    const PoissonSampler offspring(lambda);

    // Cascade: level-j survival = Pr(at least k-1 of Poisson(lambda)
    // children survive level j-1), estimated over `population` particles.
    CoreDegreeHistogram out;
    double f = 1.0;  // level-0 survival is certain
    for (std::size_t level = 1; level <= d + 4; ++level) {
        Xoshiro256 rng(stream_seed(mix64(cfg.seed ^ 0x1b873593a4093822ULL), level));
        std::uint64_t survived = 0;
        for (std::uint64_t p = 0; p < population; ++p) {
            const std::int64_t children = offspring(rng);
            std::int64_t alive = 0;
            for (std::int64_t i = 0; i < children; ++i) {
                if (alive + (children - i) < k.k - 1) break;
                if (rng.uniform() < f && ++alive >= k.k - 1) break;
            }
            if (alive >= k.k - 1) ++survived;
        }
        f = double(survived) / double(population);
        if (level == d - 1) out.child_survival = f;
    }
    out.child_survival_deeper = f;

    // Root phase: children survive independently with the level-(d-1)
    // estimate; record the survivor count conditioned on >= k.
    const double f_root = out.child_survival;
    const std::uint64_t max_trials =
        std::max<std::uint64_t>(std::uint64_t(cfg.samples) * 1000, 1000000);
    const std::uint64_t root_salt = mix64(cfg.seed ^ 0x85ebca6b9e3779b9ULL);
    for (std::uint64_t t = 0; t < max_trials && out.conditioned < cfg.samples; ++t) {
        Xoshiro256 rng(stream_seed(root_salt, t));
        const std::int64_t children = offspring(rng);
        const std::int64_t alive = sample_binomial(rng, children, f_root);
        if (alive >= k.k) {
            ++out.counts[std::uint64_t(alive)];
            ++out.conditioned;
        } else {
            ++out.rejected;
        }
    }
    return out;
}

// CSV row form shared by the estimators: parameters first, then results.
inline void write_bp_estimate_csv_header(std::ostream& out) {
    out << "k,lambda,kernel,d,samples,estimate,std_error,successes,aborts\n";
}

inline void write_bp_estimate_csv_row(std::ostream& out, int k, double lambda,
                                      const std::string& kernel_id, std::size_t d,
                                      const BPEstimate& est) {
    char num[64];
    out << k << ',';
    std::snprintf(num, sizeof num, "%.17g", lambda);
    out << num << ',' << kernel_id << ',' << d << ',' << est.trials << ',';
    std::snprintf(num, sizeof num, "%.17g", est.estimate);
    out << num << ',';
    std::snprintf(num, sizeof num, "%.17g", est.std_error);
    out << num << ',' << est.successes << ',' << est.aborts << '\n';
}

}  // namespace corebp
