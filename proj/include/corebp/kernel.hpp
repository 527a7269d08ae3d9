#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Kernel descriptions consumed by the solvers and generators. A finite-type
// kernel is a symmetric nonnegative matrix over r vertex types with positive
// type weights summing to 1. The rank-1 power-law kernel is kappa(x, y) =
// c / sqrt(x * y) on the type space (0, 1].

namespace corebp {

struct FiniteTypeKernel {
    std::vector<std::vector<double>> kappa;
    std::vector<double> mu;

    std::size_t r() const { return mu.size(); }

    void validate() const {
        const std::size_t n = mu.size();
        if (n == 0) throw std::invalid_argument("FiniteTypeKernel: no types");
        if (kappa.size() != n) {
            throw std::invalid_argument("FiniteTypeKernel: kappa is not r x r");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) {
                throw std::invalid_argument("FiniteTypeKernel: mu entries must be positive");
            }
            total += mu[i];
            if (kappa[i].size() != n) {
                throw std::invalid_argument("FiniteTypeKernel: kappa is not r x r");
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!(kappa[i][j] >= 0.0) || !std::isfinite(kappa[i][j])) {
                    throw std::invalid_argument(
                        "FiniteTypeKernel: kappa entries must be finite and nonnegative");
                }
                if (kappa[i][j] != kappa[j][i]) {
                    throw std::invalid_argument("FiniteTypeKernel: kappa must be symmetric");
                }
            }
        }
        if (std::fabs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("FiniteTypeKernel: mu must sum to 1");
        }
    }

    FiniteTypeKernel scaled(double s) const {
        FiniteTypeKernel out = *this;
        for (auto& row : out.kappa) {
            for (auto& v : row) v *= s;
        }
        return out;
    }
};

struct Rank1PowerLawKernel {
    double c = 1.0;

    void validate() const {
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw std::invalid_argument("Rank1PowerLawKernel: c must be positive and finite");
        }
    }

    double operator()(double x, double y) const { return c / std::sqrt(x * y); }
};

// Step-function lower bound for the rank-1 kernel: m equal cells on
// [eps, 1], value on a cell pair = infimum of c/sqrt(xy) there (attained at
// the two right endpoints), plus one zero-kernel type of weight eps covering
// the truncated part (0, eps). The result never exceeds the kernel itself,
// so its core fraction approaches the rank-1 answer from below under
// refinement.
inline FiniteTypeKernel kernel_discretize(const Rank1PowerLawKernel& kernel,
                                          std::size_t m, double eps) {
    kernel.validate();
    if (m < 1) throw std::invalid_argument("kernel_discretize: m must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("kernel_discretize: eps must lie in (0, 1)");
    }

    const double width = (1.0 - eps) / double(m);
    std::vector<double> right(m);
    for (std::size_t i = 0; i < m; ++i) {
        right[i] = eps + width * double(i + 1);
    }

    FiniteTypeKernel out;
    out.mu.assign(m + 1, width);
    out.mu[m] = eps;  // zero-kernel type for the truncated slice
    out.kappa.assign(m + 1, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out.kappa[i][j] = kernel(right[i], right[j]);
        }
    }
    return out;
}

}  // namespace corebp
