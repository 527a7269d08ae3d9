#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "corebp/graph.hpp"
#include "corebp/kernel.hpp"
#include "corebp/rng.hpp"

// Seeded random-graph generators. Three models share one machinery: a
// per-pair edge probability p_ij built from a kernel value K_ij,
//
//   erdos_renyi:     K_ij = lambda                       (types irrelevant)
//   finite_type:     K_ij = kappa[type(i)][type(j)]      (contiguous blocks)
//   rank1_power_law: K_ij = c / sqrt((i+1)(j+1) / n^2)   (type x_i = (i+1)/n)
//
// under one of two rules: capped p = min(K/n, 1) or odds p = K/(n + K).
// Each unordered pair is present independently with exactly p_ij. Row i
// draws from its own RNG stream derived via stream_seed(seed, i), so output
// is bit-identical for a fixed seed no matter how rows are split across
// threads. Expected work is O(n + m) for the homogeneous and rank-1 models
// (geometric skips; the rank-1 rows add a doubling-segment rejection layer
// whose acceptance never drops below 1/sqrt(2)) and O(r n + m) for
// finite-type.

namespace corebp {

enum class ModelKind { erdos_renyi, finite_type, rank1_power_law };
enum class EdgeRule { capped, odds };

struct GenSpec {
    ModelKind model = ModelKind::erdos_renyi;
    EdgeRule edge_rule = EdgeRule::capped;
    double lambda = 1.0;           // erdos_renyi
    double c = 1.0;                // rank1_power_law
    FiniteTypeKernel kernel;       // finite_type
    std::uint64_t seed = 0;
    std::uint64_t max_edges = 250000000;  // refuse, never truncate

    void validate() const {
        switch (model) {
            case ModelKind::erdos_renyi:
                if (!(lambda > 0.0) || !std::isfinite(lambda)) {
                    throw std::invalid_argument("GenSpec: lambda must be positive");
                }
                break;
            case ModelKind::rank1_power_law:
                if (!(c > 0.0) || !std::isfinite(c)) {
                    throw std::invalid_argument("GenSpec: c must be positive");
                }
                break;
            case ModelKind::finite_type:
                kernel.validate();
                break;
        }
        if (max_edges < 1) throw std::invalid_argument("GenSpec: max_edges must be >= 1");
    }
};

// Contiguous type blocks: sizes floor(mu_t * n) with the remainder assigned
// to the last type. Block boundaries as starts[0..r], starts[r] = n.
inline std::vector<std::uint64_t> type_block_starts(const FiniteTypeKernel& kernel,
                                                    std::uint64_t n) {
    const std::size_t r = kernel.r();
    std::vector<std::uint64_t> starts(r + 1, 0);
    for (std::size_t t = 0; t + 1 < r; ++t) {
        starts[t + 1] = starts[t] + std::uint64_t(std::floor(kernel.mu[t] * double(n)));
    }
    starts[r] = n;
    if (r > 1 && starts[r - 1] > n) {
        throw std::invalid_argument("type_block_starts: weights exceed vertex count");
    }
    return starts;
}

inline std::vector<std::uint32_t> type_assignment(const FiniteTypeKernel& kernel,
                                                  std::uint64_t n) {
    const auto starts = type_block_starts(kernel, n);
    std::vector<std::uint32_t> types(n);
    for (std::size_t t = 0; t < kernel.r(); ++t) {
        for (std::uint64_t v = starts[t]; v < starts[t + 1]; ++v) {
            types[v] = std::uint32_t(t);
        }
    }
    return types;
}

namespace detail {

inline double apply_edge_rule(double kernel_value, double n, EdgeRule rule) {
    return rule == EdgeRule::capped ? std::fmin(kernel_value / n, 1.0)
                                    : kernel_value / (n + kernel_value);
}

// Rank-1 pair probability with 1-based indices I, J, matching
// K/n = c/sqrt(I*J) under the capped rule and c/(sqrt(I*J) + c) under odds.
inline double rank1_pair_prob(double c, double I, double J, EdgeRule rule) {
    const double root = std::sqrt(I * J);
    return rule == EdgeRule::capped ? std::fmin(c / root, 1.0) : c / (root + c);
}

template <typename Emit>
void sample_constant_range(Xoshiro256& rng, double p, std::uint64_t lo,
                           std::uint64_t hi, Emit&& emit) {
    if (lo >= hi || p <= 0.0) return;
    if (p >= 1.0) {
        for (std::uint64_t j = lo; j < hi; ++j) emit(j);
        return;
    }
    std::uint64_t j = lo;
    while (true) {
        const std::uint64_t skip = geometric_skip(rng, p);
        if (skip >= hi - j) return;
        j += skip;
        emit(j);
        if (++j >= hi) return;
    }
}

// Columns J in [start, n] (1-based) for rank-1 row I: p(J) decreases in J,
// so on each doubling segment [L, 2L) the left endpoint value q bounds it
// and thinning candidates by p(J)/q >= 1/sqrt(2) is exact and cheap.
template <typename Emit>
void sample_rank1_row_tail(Xoshiro256& rng, double c, std::uint64_t I,
                           std::uint64_t start, std::uint64_t n, EdgeRule rule,
                           Emit&& emit) {
    std::uint64_t L = start;
    while (L <= n) {
        const std::uint64_t R = std::min(n, 2 * L - 1);
        const double q = rank1_pair_prob(c, double(I), double(L), rule);
        std::uint64_t J = L;
        while (true) {
            const std::uint64_t skip = geometric_skip(rng, q);
            if (skip > R - J) break;
            J += skip;
            const double p = rank1_pair_prob(c, double(I), double(J), rule);
            if (rng.uniform() * q < p) emit(J);
            if (++J > R) break;
        }
        L = R + 1;
    }
}

struct GenContext {
    const GenSpec* spec;
    std::uint64_t n;
    std::vector<std::uint64_t> block_starts;  // finite_type only
    std::vector<std::uint32_t> types;         // finite_type only
};

// Emits row i's neighbors j > i (0-based) in ascending order.
template <typename Emit>
void sample_row(const GenContext& ctx, std::uint64_t i, Emit&& emit) {
    const GenSpec& spec = *ctx.spec;
    Xoshiro256 rng(stream_seed(spec.seed, i));
    const double n = double(ctx.n);
    switch (spec.model) {
        case ModelKind::erdos_renyi: {
            const double p = apply_edge_rule(spec.lambda, n, spec.edge_rule);
            sample_constant_range(rng, p, i + 1, ctx.n, emit);
            break;
        }
        case ModelKind::finite_type: {
            const std::size_t a = ctx.types[i];
            const std::size_t r = spec.kernel.r();
            for (std::size_t b = 0; b < r; ++b) {
                const std::uint64_t lo = std::max(ctx.block_starts[b], i + 1);
                const std::uint64_t hi = ctx.block_starts[b + 1];
                const double p =
                    apply_edge_rule(spec.kernel.kappa[a][b], n, spec.edge_rule);
                sample_constant_range(rng, p, lo, hi, emit);
            }
            break;
        }
        case ModelKind::rank1_power_law: {
            const std::uint64_t I = i + 1;  // 1-based for c/sqrt(I*J)
            std::uint64_t start = I + 1;
            if (spec.edge_rule == EdgeRule::capped) {
                // Pairs with I*J <= c^2 have probability exactly 1.
                while (start <= ctx.n &&
                       double(I) * double(start) <= spec.c * spec.c) {
                    emit(start - 1);
                    ++start;
                }
            }
            sample_rank1_row_tail(rng, spec.c, I, start, ctx.n, spec.edge_rule,
                                  [&](std::uint64_t J) { emit(J - 1); });
            break;
        }
    }
}

inline void sample_rows(const GenContext& ctx, std::uint64_t row_begin,
                        std::uint64_t row_end,
                        std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    for (std::uint64_t i = row_begin; i < row_end; ++i) {
        sample_row(ctx, i, [&](std::uint64_t j) {
            if (edges.size() >= ctx.spec->max_edges) {
                throw std::runtime_error(
                    "generate: edge budget exceeded (max_edges); refusing to truncate");
            }
            edges.emplace_back(std::uint32_t(i), std::uint32_t(j));
        });
    }
}

}  // namespace detail

inline Graph generate(const GenSpec& spec, std::uint64_t n, unsigned threads = 1) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
    if (n > 0xffffffffULL) throw std::invalid_argument("generate: n exceeds 32-bit ids");

    detail::GenContext ctx;
    ctx.spec = &spec;
    ctx.n = n;
    if (spec.model == ModelKind::finite_type) {
        ctx.block_starts = type_block_starts(spec.kernel, n);
        ctx.types = type_assignment(spec.kernel, n);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    if (threads <= 1 || n < 2 * std::uint64_t(threads)) {
        detail::sample_rows(ctx, 0, n, edges);
    } else {
        // Contiguous row ranges; per-row streams make the concatenation
        // identical to the sequential pass.
        const std::uint64_t t = threads;
        std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> parts(t);
        std::vector<std::exception_ptr> errors(t);
        std::vector<std::thread> workers;
        workers.reserve(t);
        for (std::uint64_t w = 0; w < t; ++w) {
            workers.emplace_back([&, w] {
                try {
                    detail::sample_rows(ctx, n * w / t, n * (w + 1) / t, parts[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : workers) th.join();
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
        std::uint64_t total = 0;
        for (const auto& part : parts) total += part.size();
        if (total > spec.max_edges) {
            throw std::runtime_error(
                "generate: edge budget exceeded (max_edges); refusing to truncate");
        }
        edges.reserve(total);
        for (auto& part : parts) {
            edges.insert(edges.end(), part.begin(), part.end());
        }
    }
    return build_graph(n, edges);
}

// O(n^2) oracle: one Bernoulli draw per pair from the same per-row streams.
// Distributionally identical to generate(); not bit-identical (the skip
// sampler consumes different variates).
inline Graph generate_reference(const GenSpec& spec, std::uint64_t n) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("generate_reference: n must be >= 1");
    if (n > 20000) {
        throw std::invalid_argument("generate_reference: guard n <= 20000");
    }

    std::vector<std::uint32_t> types;
    if (spec.model == ModelKind::finite_type) types = type_assignment(spec.kernel, n);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint64_t i = 0; i < n; ++i) {
        Xoshiro256 rng(stream_seed(spec.seed, i));
        for (std::uint64_t j = i + 1; j < n; ++j) {
            double p = 0.0;
            switch (spec.model) {
                case ModelKind::erdos_renyi:
                    p = detail::apply_edge_rule(spec.lambda, double(n), spec.edge_rule);
                    break;
                case ModelKind::finite_type:
                    p = detail::apply_edge_rule(spec.kernel.kappa[types[i]][types[j]],
                                                double(n), spec.edge_rule);
                    break;
                case ModelKind::rank1_power_law:
                    p = detail::rank1_pair_prob(spec.c, double(i + 1), double(j + 1),
                                                spec.edge_rule);
                    break;
            }
            if (rng.uniform() < p) edges.emplace_back(std::uint32_t(i), std::uint32_t(j));
        }
    }
    return build_graph(n, edges);
}

// Exact sum of p_ij over unordered pairs: closed form where blocks make it
// cheap, direct summation for rank-1 (O(n^2), intended for validation runs).
inline double expected_edge_count(const GenSpec& spec, std::uint64_t n) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("expected_edge_count: n must be >= 1");
    const double dn = double(n);
    switch (spec.model) {
        case ModelKind::erdos_renyi: {
            const double p = detail::apply_edge_rule(spec.lambda, dn, spec.edge_rule);
            return 0.5 * dn * (dn - 1.0) * p;
        }
        case ModelKind::finite_type: {
            const auto starts = type_block_starts(spec.kernel, n);
            const std::size_t r = spec.kernel.r();
            double total = 0.0;
            for (std::size_t a = 0; a < r; ++a) {
                const double sa = double(starts[a + 1] - starts[a]);
                const double paa =
                    detail::apply_edge_rule(spec.kernel.kappa[a][a], dn, spec.edge_rule);
                total += 0.5 * sa * (sa - 1.0) * paa;
                for (std::size_t b = a + 1; b < r; ++b) {
                    const double sb = double(starts[b + 1] - starts[b]);
                    const double pab = detail::apply_edge_rule(spec.kernel.kappa[a][b],
                                                               dn, spec.edge_rule);
                    total += sa * sb * pab;
                }
            }
            return total;
        }
        case ModelKind::rank1_power_law: {
            double total = 0.0;
            for (std::uint64_t i = 1; i <= n; ++i) {
                for (std::uint64_t j = i + 1; j <= n; ++j) {
                    total += detail::rank1_pair_prob(spec.c, double(i), double(j),
                                                     spec.edge_rule);
                }
            }
            return total;
        }
    }
    return 0.0;
}

}  // namespace corebp
