#pragma once

#include <cmath>
#include <cstdint>

// Deterministic RNG streams. Every generator and Monte-Carlo trial derives its
// own stream from a master seed through mix64, so results are reproducible for
// a fixed seed no matter how work is split across threads.

namespace corebp {

// SplitMix64 finalizer. Bijective on 64-bit values.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream seed for substream `idx` of `master`. Documented contract: this is
// the only mixing function used to derive per-row / per-trial streams.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t idx) {
    return mix64(master ^ mix64(idx + 0x9e3779b97f4a7c15ULL));
}

// xoshiro256** by Blackman and Vigna. Small, fast, passes BigCrush.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed = 0) {
        // Seed the full state through SplitMix64 as recommended upstream.
        std::uint64_t sm = seed;
        for (auto& word : s_) {
            sm += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = sm;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Poisson sampler with precomputed constants for a fixed mean.
// Knuth's product method below PTRS_CUTOFF, Hormann's PTRS rejection above.
class PoissonSampler {
  public:
    explicit PoissonSampler(double mean = 0.0) { reset(mean); }

    void reset(double mean) {
        mean_ = mean;
        if (mean_ < kPtrsCutoff) {
            exp_neg_mean_ = std::exp(-mean_);
        } else {
            b_ = 0.931 + 2.53 * std::sqrt(mean_);
            a_ = -0.059 + 0.02483 * b_;
            inv_alpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
            v_r_ = 0.9277 - 3.6224 / (b_ - 2.0);
            log_mean_ = std::log(mean_);
        }
    }

    double mean() const { return mean_; }

    std::int64_t operator()(Xoshiro256& rng) const {
        if (mean_ <= 0.0) return 0;
        return mean_ < kPtrsCutoff ? knuth(rng) : ptrs(rng);
    }

  private:
    static constexpr double kPtrsCutoff = 10.0;

    std::int64_t knuth(Xoshiro256& rng) const {
        std::int64_t k = 0;
        double prod = 1.0;
        while (true) {
            prod *= rng.uniform_pos();
            if (prod <= exp_neg_mean_) return k;
            ++k;
        }
    }

    std::int64_t ptrs(Xoshiro256& rng) const {
        while (true) {
            const double u = rng.uniform() - 0.5;
            const double v = rng.uniform_pos();
            const double us = 0.5 - std::fabs(u);
            const auto k =
                std::int64_t(std::floor((2.0 * a_ / us + b_) * u + mean_ + 0.43));
            if (us >= 0.07 && v <= v_r_) return k;
            if (k < 0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha_ / (a_ / (us * us) + b_)) <=
                double(k) * log_mean_ - mean_ - std::lgamma(double(k) + 1.0)) {
                return k;
            }
        }
    }

    double mean_ = 0.0;
    double exp_neg_mean_ = 1.0;
    double a_ = 0.0, b_ = 0.0, inv_alpha_ = 0.0, v_r_ = 0.0, log_mean_ = 0.0;
};

// Binomial(n, p) by Bernoulli thinning; n is small in every call site.
inline std::int64_t sample_binomial(Xoshiro256& rng, std::int64_t n, double p) {
    std::int64_t s = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        if (rng.uniform() < p) ++s;
    }
    return s;
}

// Number of failures before the next success in Bernoulli(p) trials.
// Used for skip sampling of sparse edge rows; p must lie in (0, 1).
inline std::uint64_t geometric_skip(Xoshiro256& rng, double p) {
    const double u = rng.uniform_pos();
    const double g = std::floor(std::log(u) / std::log1p(-p));
    return g < 0.0 ? 0 : std::uint64_t(g);
}

}  // namespace corebp
