#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "corebp/bp.hpp"
#include "corebp/core.hpp"
#include "corebp/generate.hpp"
#include "corebp/kernel.hpp"
#include "corebp/rank1.hpp"
#include "corebp/solve.hpp"

// Config-driven sweeps tying solvers, generators, peeling and simulation
// together. A single JSON document selects an experiment kind and its grid;
// each kind emits a fixed, versioned CSV schema (parameter columns before
// result columns) with rows ordered by grid index, so identical configs
// produce byte-identical output.

namespace corebp {

struct ExperimentConfig {
    std::string kind;  // solve | threshold | graph-vs-analytic | bp-vs-analytic
                       // | exponent-fit | core-degree-law | k2-trend
    int k = 3;
    ModelKind model = ModelKind::erdos_renyi;
    EdgeRule edge_rule = EdgeRule::capped;
    // grid over lambda (erdos_renyi) or the kernel scale (finite_type)
    std::vector<double> lambda_grid;
    // grid over c (rank1_power_law, k2-trend)
    std::vector<double> c_grid;
    // grid over eps (exponent-fit), each point solved at c = (1+eps)(k-2)/2
    std::vector<double> eps_grid;
    FiniteTypeKernel kernel;
    bool has_kernel = false;
    std::vector<std::uint64_t> n_values;
    std::vector<std::uint64_t> seeds;
    std::size_t depth = 10;
    std::size_t samples = 100000;
    std::uint64_t particle_cap = 10000000;
    std::string bp_variant = "B";  // B | Bplus
    double tolerance = 0.01;       // per-row pass bound where applicable
    double jump_gap = 0.01;        // discontinuity detection threshold
    double slope_rtol = 0.05;      // exponent-fit pass bounds
    double coeff_rtol = 0.10;
    std::string out;  // optional CSV path; CLI --out overrides
    FixedPointConfig fp;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

namespace detail {

inline std::vector<double> json_grid(const nlohmann::json& j) {
    if (j.is_array()) return j.get<std::vector<double>>();
    return {j.get<double>()};
}

inline std::vector<std::uint64_t> json_grid_u64(const nlohmann::json& j) {
    if (j.is_array()) return j.get<std::vector<std::uint64_t>>();
    return {j.get<std::uint64_t>()};
}

inline FiniteTypeKernel kernel_from_json(const nlohmann::json& j) {
    FiniteTypeKernel kern;
    kern.kappa = j.at("kappa").get<std::vector<std::vector<double>>>();
    kern.mu = j.at("mu").get<std::vector<double>>();
    kern.validate();
    return kern;
}

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.kind = j.at("kind").get<std::string>();
    cfg.k = j.value("k", 3);
    if (j.contains("model")) {
        const std::string m = j.at("model").get<std::string>();
        if (m == "erdos_renyi") {
            cfg.model = ModelKind::erdos_renyi;
        } else if (m == "finite_type") {
            cfg.model = ModelKind::finite_type;
        } else if (m == "rank1_power_law") {
            cfg.model = ModelKind::rank1_power_law;
        } else {
            throw std::invalid_argument("experiment config: unknown model " + m);
        }
    }
    if (j.contains("edge_rule")) {
        const std::string rule = j.at("edge_rule").get<std::string>();
        if (rule == "capped") {
            cfg.edge_rule = EdgeRule::capped;
        } else if (rule == "odds") {
            cfg.edge_rule = EdgeRule::odds;
        } else {
            throw std::invalid_argument("experiment config: unknown edge_rule " + rule);
        }
    }
    if (j.contains("lambda")) cfg.lambda_grid = detail::json_grid(j.at("lambda"));
    if (j.contains("c")) cfg.c_grid = detail::json_grid(j.at("c"));
    if (j.contains("eps")) {
        cfg.eps_grid = detail::json_grid(j.at("eps"));
    } else if (j.contains("eps_min")) {
        const double lo = j.at("eps_min").get<double>();
        const double hi = j.at("eps_max").get<double>();
        const std::size_t points = j.value("eps_points", std::size_t(9));
        if (!(lo > 0.0) || !(hi > lo) || points < 2) {
            throw std::invalid_argument("experiment config: bad eps range");
        }
        for (std::size_t i = 0; i < points; ++i) {
            const double t = double(i) / double(points - 1);
            cfg.eps_grid.push_back(lo * std::pow(hi / lo, t));
        }
    }
    if (j.contains("kernel")) {
        cfg.kernel = detail::kernel_from_json(j.at("kernel"));
        cfg.has_kernel = true;
    } else if (j.contains("kernel_file")) {
        std::ifstream in(j.at("kernel_file").get<std::string>());
        if (!in) {
            throw std::invalid_argument("experiment config: cannot open kernel_file");
        }
        nlohmann::json kj;
        in >> kj;
        cfg.kernel = detail::kernel_from_json(kj);
        cfg.has_kernel = true;
    }
    if (j.contains("n")) cfg.n_values = detail::json_grid_u64(j.at("n"));
    if (j.contains("seeds")) {
        cfg.seeds = detail::json_grid_u64(j.at("seeds"));
    } else if (j.contains("seed")) {
        cfg.seeds = {j.at("seed").get<std::uint64_t>()};
    }
    cfg.depth = j.value("depth", std::size_t(10));
    cfg.samples = j.value("samples", std::size_t(100000));
    cfg.particle_cap = j.value("particle_cap", std::uint64_t(10000000));
    cfg.bp_variant = j.value("bp_variant", std::string("B"));
    cfg.tolerance = j.value("tolerance", 0.01);
    cfg.jump_gap = j.value("jump_gap", 0.01);
    cfg.slope_rtol = j.value("slope_rtol", 0.05);
    cfg.coeff_rtol = j.value("coeff_rtol", 0.10);
    cfg.out = j.value("out", std::string());
    cfg.fp.tolerance = j.value("fp_tolerance", cfg.fp.tolerance);
    cfg.fp.max_iterations = j.value("fp_max_iterations", cfg.fp.max_iterations);
    cfg.fp.positivity_cutoff = j.value("fp_positivity_cutoff", cfg.fp.positivity_cutoff);
    return cfg;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

namespace detail {

// Analytic asymptotic core fraction for one grid point of the configured
// model. For finite_type the grid value scales the kernel.
inline double analytic_beta_plus(const ExperimentConfig& cfg, double param) {
    switch (cfg.model) {
        case ModelKind::erdos_renyi:
            return beta_plus_uniform(cfg.k, param, cfg.fp).value;
        case ModelKind::rank1_power_law:
            return beta_plus_rank1(Rank1PowerLawKernel{param}, cfg.k, cfg.fp).value;
        case ModelKind::finite_type:
            if (!cfg.has_kernel) {
                throw std::invalid_argument("experiment: finite_type model needs a kernel");
            }
            return beta_plus_finite_type(cfg.kernel.scaled(param), cfg.k, cfg.fp).value;
    }
    return 0.0;
}

inline std::vector<double> model_grid(const ExperimentConfig& cfg) {
    switch (cfg.model) {
        case ModelKind::erdos_renyi:
            return cfg.lambda_grid;
        case ModelKind::rank1_power_law:
            return cfg.c_grid;
        case ModelKind::finite_type:
            // kernel scale; default to the kernel as given
            return cfg.lambda_grid.empty() ? std::vector<double>{1.0}
                                           : cfg.lambda_grid;
    }
    return {};
}

inline GenSpec gen_spec_for(const ExperimentConfig& cfg, double param,
                            std::uint64_t seed) {
    GenSpec spec;
    spec.model = cfg.model;
    spec.edge_rule = cfg.edge_rule;
    spec.seed = seed;
    switch (cfg.model) {
        case ModelKind::erdos_renyi:
            spec.lambda = param;
            break;
        case ModelKind::rank1_power_law:
            spec.c = param;
            break;
        case ModelKind::finite_type:
            spec.kernel = cfg.kernel.scaled(param);
            break;
    }
    return spec;
}

}  // namespace detail

// ---- solve: analytic values over the model grid -------------------------

struct SolveRow {
    double param = 0.0;
    double beta = 0.0;       // scalar beta, or mu-weighted mean in finite-type
    double beta_plus = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool near_critical = false;
};

inline std::vector<SolveRow> solve_grid(const ExperimentConfig& cfg) {
    const std::vector<double> grid = detail::model_grid(cfg);
    if (grid.empty()) throw std::invalid_argument("solve: empty grid");
    std::vector<SolveRow> rows;
    rows.reserve(grid.size());
    for (const double param : grid) {
        SolveRow row;
        row.param = param;
        switch (cfg.model) {
            case ModelKind::erdos_renyi: {
                const SolveResult b = beta_uniform(cfg.k, param, cfg.fp);
                const SolveResult bp = beta_plus_uniform(cfg.k, param, cfg.fp);
                row.beta = b.value;
                row.beta_plus = bp.value;
                row.residual = b.residual;
                row.iterations = b.iterations;
                row.converged = b.converged;
                row.near_critical = b.near_critical;
                break;
            }
            case ModelKind::rank1_power_law: {
                const SolveResult a = a_rank1(Rank1PowerLawKernel{param}, cfg.k, cfg.fp);
                const SolveResult bp =
                    beta_plus_rank1(Rank1PowerLawKernel{param}, cfg.k, cfg.fp);
                row.beta = a.value;  // the scalar fixed point A
                row.beta_plus = bp.value;
                row.residual = a.residual;
                row.iterations = a.iterations;
                row.converged = a.converged;
                row.near_critical = a.near_critical;
                break;
            }
            case ModelKind::finite_type: {
                if (!cfg.has_kernel) {
                    throw std::invalid_argument("solve: finite_type model needs a kernel");
                }
                const FiniteTypeKernel scaled = cfg.kernel.scaled(param);
                const VectorSolveResult b = beta_finite_type(scaled, cfg.k, cfg.fp);
                const SolveResult bp = beta_plus_finite_type(scaled, cfg.k, cfg.fp);
                double mean = 0.0;
                for (std::size_t i = 0; i < scaled.r(); ++i) {
                    mean += scaled.mu[i] * b.values[i];
                }
                row.beta = mean;
                row.beta_plus = bp.value;
                row.residual = b.residual;
                row.iterations = b.iterations;
                row.converged = b.converged;
                row.near_critical = b.near_critical;
                break;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

// ---- graph-vs-analytic: desk-scale check of the core-fraction law -------

struct SweepRow {
    double param = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double analytic = 0.0;
    double empirical = 0.0;
    double deviation = 0.0;
    bool pass = false;
    std::string note;  // per-row failure record; the sweep itself continues
};

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
    const std::vector<double> grid = detail::model_grid(cfg);
    if (grid.empty()) throw std::invalid_argument("run_sweep: empty model grid");
    if (cfg.n_values.empty()) throw std::invalid_argument("run_sweep: no n values");
    if (cfg.seeds.empty()) throw std::invalid_argument("run_sweep: no seeds");
    for (const std::uint64_t n : cfg.n_values) {
        if (n == 0) throw std::invalid_argument("run_sweep: n must be positive");
    }

    std::vector<SweepRow> rows;
    for (const double param : grid) {
        const double analytic = detail::analytic_beta_plus(cfg, param);
        for (const std::uint64_t n : cfg.n_values) {
            for (const std::uint64_t seed : cfg.seeds) {
                SweepRow row;
                row.param = param;
                row.n = n;
                row.seed = seed;
                row.analytic = analytic;
                try {
                    const Graph g = generate(detail::gen_spec_for(cfg, param, seed), n);
                    const CoreResult cores = core_numbers(g);
                    const std::uint64_t ck =
                        std::size_t(cfg.k) < cores.core_sizes.size()
                            ? cores.core_sizes[std::size_t(cfg.k)]
                            : 0;
                    row.empirical = double(ck) / double(n);
                    row.deviation = std::fabs(row.empirical - row.analytic);
                    row.pass = row.deviation <= cfg.tolerance;
                } catch (const std::exception& e) {
                    row.empirical = std::numeric_limits<double>::quiet_NaN();
                    row.deviation = std::numeric_limits<double>::quiet_NaN();
                    row.pass = false;
                    row.note = e.what();
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

// ---- bp-vs-analytic: Monte-Carlo estimates against exact iterates -------

struct BpCompareRow {
    double lambda = 0.0;
    std::size_t d = 0;
    double analytic = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0;  // 3 * max(empirical SE, SE at the analytic value)
    std::uint64_t trials = 0;
    std::uint64_t aborts = 0;
    bool pass = false;
};

inline std::vector<BpCompareRow> bp_vs_analytic(const ExperimentConfig& cfg) {
    if (cfg.lambda_grid.empty()) {
        throw std::invalid_argument("bp-vs-analytic: empty lambda grid");
    }
    if (cfg.seeds.empty()) throw std::invalid_argument("bp-vs-analytic: no seeds");
    const bool plus = cfg.bp_variant == "Bplus";
    if (!plus && cfg.bp_variant != "B") {
        throw std::invalid_argument("bp-vs-analytic: bp_variant must be B or Bplus");
    }

    std::vector<BpCompareRow> rows;
    for (const double lambda : cfg.lambda_grid) {
        BPConfig bp;
        bp.depth = cfg.depth;
        bp.samples = cfg.samples;
        bp.particle_cap = cfg.particle_cap;
        bp.seed = cfg.seeds.front();
        const BPEstimate est = plus ? estimate_Bplus_d(cfg.k, lambda, bp)
                                    : estimate_B_d(cfg.k, lambda, bp);
        BpCompareRow row;
        row.lambda = lambda;
        row.d = cfg.depth;
        row.analytic =
            plus ? poisson_tail(double(cfg.k),
                                lambda * iterate_B(cfg.k, lambda, cfg.depth - 1))
                 : iterate_B(cfg.k, lambda, cfg.depth);
        row.estimate = est.estimate;
        row.std_error = est.std_error;
        row.trials = est.trials;
        row.aborts = est.aborts;
        const double effective = double(est.trials - est.aborts);
        // Near-degenerate iterates make the empirical SE collapse; bound by
        // the SE the analytic value itself implies, so zero-success cells
        // stay honestly testable.
        const double model_se =
            effective > 0.0
                ? std::sqrt(std::fmax(row.analytic * (1.0 - row.analytic), 0.0) /
                            effective)
                : std::numeric_limits<double>::infinity();
        row.bound = 3.0 * std::fmax(est.std_error, model_se);
        row.pass = std::fabs(row.estimate - row.analytic) <= row.bound;
        rows.push_back(row);
    }
    return rows;
}

// ---- threshold: jump detection and threshold bisection -------------------

struct JumpInterval {
    double lo = 0.0;
    double hi = 0.0;
    double value_lo = 0.0;
    double value_hi = 0.0;
};

struct ThresholdScanResult {
    std::vector<JumpInterval> jumps;
    // rank1: bisected c-threshold; erdos_renyi: lambda_c from the solver
    double threshold = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Candidate cells where a nondecreasing function rises by more than `gap`
// are bisected toward the steep point; only cells whose gap persists at
// relative width `rel_width` are genuine discontinuities, the rest are
// steep-but-continuous stretches.
template <typename F>
std::vector<JumpInterval> scan_jumps(F&& eval, const std::vector<double>& grid,
                                     double gap, double rel_width = 1e-4) {
    std::vector<JumpInterval> jumps;
    if (grid.size() < 2) return jumps;
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = eval(grid[i]);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(vals[i + 1] - vals[i] > gap)) continue;
        double lo = grid[i], hi = grid[i + 1];
        double flo = vals[i], fhi = vals[i + 1];
        while (hi - lo > rel_width * std::fmax(std::fabs(hi), 1e-300)) {
            const double mid = 0.5 * (lo + hi);
            const double fmid = eval(mid);
            if (fmid - flo >= fhi - fmid) {
                hi = mid;
                fhi = fmid;
            } else {
                lo = mid;
                flo = fmid;
            }
        }
        if (fhi - flo > gap) jumps.push_back({lo, hi, flo, fhi});
    }
    return jumps;
}

}  // namespace detail

inline ThresholdScanResult threshold_scan(const ExperimentConfig& cfg) {
    ThresholdScanResult res;
    switch (cfg.model) {
        case ModelKind::erdos_renyi: {
            if (cfg.lambda_grid.size() >= 2) {
                res.jumps = detail::scan_jumps(
                    [&](double lam) { return beta_plus_uniform(cfg.k, lam, cfg.fp).value; },
                    cfg.lambda_grid, cfg.jump_gap);
            }
            res.threshold = lambda_c(cfg.k, cfg.fp);
            break;
        }
        case ModelKind::rank1_power_law: {
            if (cfg.c_grid.size() >= 2) {
                res.jumps = detail::scan_jumps(
                    [&](double c) {
                        return beta_plus_rank1(Rank1PowerLawKernel{c}, cfg.k, cfg.fp).value;
                    },
                    cfg.c_grid, cfg.jump_gap);
            }
            if (cfg.k >= 3) res.threshold = rank1_threshold(cfg.k, 1e-3, cfg.fp);
            break;
        }
        case ModelKind::finite_type: {
            if (!cfg.has_kernel) {
                throw std::invalid_argument("threshold: finite_type model needs a kernel");
            }
            if (cfg.lambda_grid.size() < 2) {
                throw std::invalid_argument("threshold: finite_type needs a scale grid");
            }
            res.jumps = detail::scan_jumps(
                [&](double scale) {
                    return beta_plus_finite_type(cfg.kernel.scaled(scale), cfg.k, cfg.fp)
                        .value;
                },
                cfg.lambda_grid, cfg.jump_gap);
            break;
        }
    }
    return res;
}

// ---- exponent-fit: log-log least squares near the rank-1 threshold ------

struct FitResult {
    double slope = 0.0;
    double coefficient = 0.0;
    double max_abs_log_residual = 0.0;
    std::vector<std::array<double, 2>> points;  // (eps, beta_plus)
    double slope_target = 0.0;
    double coefficient_target = 0.0;
    bool pass = false;
};

inline FitResult fit_exponent(const ExperimentConfig& cfg) {
    if (cfg.k < 3) throw std::invalid_argument("exponent-fit: requires k >= 3");
    if (cfg.eps_grid.size() < 3) {
        throw std::invalid_argument("exponent-fit: need at least 3 eps points");
    }
    double lo = cfg.eps_grid.front(), hi = cfg.eps_grid.front();
    for (const double e : cfg.eps_grid) {
        if (!(e > 0.0)) throw std::invalid_argument("exponent-fit: eps must be positive");
        lo = std::fmin(lo, e);
        hi = std::fmax(hi, e);
    }
    if (hi / lo < 100.0) {
        throw std::invalid_argument("exponent-fit: eps grid must span >= 2 decades");
    }

    const double c0 = 0.5 * double(cfg.k - 2);
    FitResult fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const double eps : cfg.eps_grid) {
        const double bp =
            beta_plus_rank1(Rank1PowerLawKernel{(1.0 + eps) * c0}, cfg.k, cfg.fp).value;
        if (!(bp > 0.0)) {
            throw std::invalid_argument("exponent-fit: grid point below threshold");
        }
        fit.points.push_back({eps, bp});
        const double x = std::log(eps), y = std::log(bp);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(fit.points.size());
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.coefficient = std::exp((sy - fit.slope * sx) / n);
    for (const auto& [eps, bp] : fit.points) {
        const double predicted =
            fit.slope * std::log(eps) + std::log(fit.coefficient);
        fit.max_abs_log_residual =
            std::fmax(fit.max_abs_log_residual, std::fabs(std::log(bp) - predicted));
    }
    fit.slope_target = 2.0 / double(cfg.k - 2);
    fit.coefficient_target =
        std::pow(std::tgamma(double(cfg.k)), 2.0 / double(cfg.k - 2)) /
        double((cfg.k - 1) * (cfg.k - 2));
    fit.pass = std::fabs(fit.slope - fit.slope_target) <=
                   cfg.slope_rtol * fit.slope_target &&
               std::fabs(fit.coefficient - fit.coefficient_target) <=
                   cfg.coeff_rtol * fit.coefficient_target;
    return fit;
}

// ---- core-degree-law: core histogram vs branching-process degree law ----

struct CoreLawResult {
    double tv_distance = 0.0;
    std::uint64_t core_size = 0;
    std::uint64_t conditioned = 0;
    std::uint64_t rejected = 0;
    double child_survival = 0.0;
    double child_survival_deeper = 0.0;
    bool pass = false;
};

inline CoreLawResult core_degree_law(const ExperimentConfig& cfg) {
    if (cfg.model != ModelKind::erdos_renyi) {
        throw std::invalid_argument("core-degree-law: erdos_renyi model only");
    }
    if (cfg.lambda_grid.size() != 1 || cfg.n_values.size() != 1 || cfg.seeds.empty()) {
        throw std::invalid_argument(
            "core-degree-law: needs one lambda, one n and a seed");
    }
    const double lambda = cfg.lambda_grid.front();
    const std::uint64_t n = cfg.n_values.front();

    GenSpec spec;
    spec.model = ModelKind::erdos_renyi;
    spec.edge_rule = cfg.edge_rule;
    spec.lambda = lambda;
    spec.seed = cfg.seeds.front();
    const Graph g = generate(spec, n);
    const CoreResult cores = core_numbers(g);
    const std::vector<std::uint64_t> graph_hist =
        core_degree_histogram(g, cores, cfg.k);

    BPConfig bp;
    bp.samples = cfg.samples;
    bp.seed = cfg.seeds.front();
    bp.particle_cap = cfg.particle_cap;
    const CoreDegreeHistogram sim =
        sample_core_root_degree(cfg.k, lambda, cfg.depth, bp);

    std::uint64_t graph_total = 0;
    for (const std::uint64_t c : graph_hist) graph_total += c;
    std::uint64_t sim_total = sim.conditioned;

    CoreLawResult res;
    res.core_size = graph_total;
    res.conditioned = sim.conditioned;
    res.rejected = sim.rejected;
    res.child_survival = sim.child_survival;
    res.child_survival_deeper = sim.child_survival_deeper;
    if (graph_total == 0 || sim_total == 0) {
        res.tv_distance = graph_total == sim_total ? 0.0 : 1.0;
    } else {
        std::uint64_t max_deg = graph_hist.empty() ? 0 : graph_hist.size() - 1;
        if (!sim.counts.empty()) {
            max_deg = std::max(max_deg, sim.counts.rbegin()->first);
        }
        double tv = 0.0;
        for (std::uint64_t d = 0; d <= max_deg; ++d) {
            const double pg =
                d < graph_hist.size() ? double(graph_hist[d]) / double(graph_total) : 0.0;
            const auto it = sim.counts.find(d);
            const double ps =
                it != sim.counts.end() ? double(it->second) / double(sim_total) : 0.0;
            tv += std::fabs(pg - ps);
        }
        res.tv_distance = 0.5 * tv;
    }
    res.pass = res.tv_distance <= cfg.tolerance;
    return res;
}

// ---- k2-trend: numerical solutions against the small-c laws -------------

struct K2TrendRow {
    double c = 0.0;
    double a2 = 0.0;
    double a2_asymptote = 0.0;
    double a2_ratio = 0.0;
    double beta_plus = 0.0;
    double beta_plus_asymptote = 0.0;
    double beta_plus_ratio = 0.0;
    bool flagged = false;  // underflow or snapped solution; excluded from the trend
};

struct K2TrendResult {
    std::vector<K2TrendRow> rows;
    bool ratios_monotone = false;  // |ratio - 1| nonincreasing along the grid
    bool all_positive = false;     // beta_plus > 0 on every unflagged row
};

inline K2TrendResult k2_trend(const ExperimentConfig& cfg) {
    if (cfg.c_grid.size() < 2) {
        throw std::invalid_argument("k2-trend: need a decreasing c grid");
    }
    for (std::size_t i = 0; i + 1 < cfg.c_grid.size(); ++i) {
        if (!(cfg.c_grid[i] > cfg.c_grid[i + 1])) {
            throw std::invalid_argument("k2-trend: c grid must decrease");
        }
    }
    if (!(cfg.c_grid.back() > 0.0)) {
        throw std::invalid_argument("k2-trend: c must stay positive");
    }

    K2TrendResult res;
    res.ratios_monotone = true;
    res.all_positive = true;
    double prev_a2_dev = std::numeric_limits<double>::infinity();
    double prev_bp_dev = std::numeric_limits<double>::infinity();
    for (const double c : cfg.c_grid) {
        K2TrendRow row;
        row.c = c;
        const Rank1PowerLawKernel kernel{c};
        row.a2 = a_rank1(kernel, 2, cfg.fp).value;
        row.beta_plus = beta_plus_rank1(kernel, 2, cfg.fp).value;
        row.a2_asymptote = asymptotic_a2(c);
        row.beta_plus_asymptote = asymptotic_beta_plus2(c);
        // double-precision sanity floor: below c = 0.04 the asymptote
        // underflows the solver's positivity cutoff scale
        row.flagged = c < 0.04 || row.a2 <= 0.0 || row.beta_plus <= 0.0 ||
                      row.a2_asymptote < 1e-300 || row.beta_plus_asymptote < 1e-300;
        if (!row.flagged) {
            row.a2_ratio = row.a2 / row.a2_asymptote;
            row.beta_plus_ratio = row.beta_plus / row.beta_plus_asymptote;
            const double a2_dev = std::fabs(row.a2_ratio - 1.0);
            const double bp_dev = std::fabs(row.beta_plus_ratio - 1.0);
            if (a2_dev > prev_a2_dev || bp_dev > prev_bp_dev) {
                res.ratios_monotone = false;
            }
            prev_a2_dev = a2_dev;
            prev_bp_dev = bp_dev;
        } else if (row.beta_plus <= 0.0) {
            res.all_positive = false;
        }
        res.rows.push_back(row);
    }
    return res;
}

// ---- dispatcher and CSV -------------------------------------------------

struct ExperimentOutcome {
    std::string kind;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    bool all_pass = true;
};

inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    using detail::format_double;
    ExperimentOutcome out;
    out.kind = cfg.kind;
    const std::string schema = cfg.kind + "/v1";

    if (cfg.kind == "solve") {
        out.header = {"schema",     "k",          "param",        "beta",
                      "beta_plus",  "residual",   "iterations",   "converged",
                      "near_critical"};
        for (const SolveRow& r : solve_grid(cfg)) {
            out.rows.push_back({schema, std::to_string(cfg.k), format_double(r.param),
                                format_double(r.beta), format_double(r.beta_plus),
                                format_double(r.residual), std::to_string(r.iterations),
                                r.converged ? "1" : "0", r.near_critical ? "1" : "0"});
        }
    } else if (cfg.kind == "graph-vs-analytic") {
        out.header = {"schema",    "k",        "param",     "n",
                      "seed",      "analytic", "empirical", "deviation",
                      "tolerance", "pass",     "note"};
        for (const SweepRow& r : run_sweep(cfg)) {
            out.all_pass = out.all_pass && r.pass;
            out.rows.push_back({schema, std::to_string(cfg.k), format_double(r.param),
                                std::to_string(r.n), std::to_string(r.seed),
                                format_double(r.analytic), format_double(r.empirical),
                                format_double(r.deviation), format_double(cfg.tolerance),
                                r.pass ? "1" : "0", r.note});
        }
    } else if (cfg.kind == "bp-vs-analytic") {
        out.header = {"schema", "k",        "variant",  "lambda", "d",
                      "trials", "analytic", "estimate", "std_error", "bound",
                      "aborts", "pass"};
        for (const BpCompareRow& r : bp_vs_analytic(cfg)) {
            out.all_pass = out.all_pass && r.pass;
            out.rows.push_back({schema, std::to_string(cfg.k), cfg.bp_variant,
                                format_double(r.lambda), std::to_string(r.d),
                                std::to_string(r.trials), format_double(r.analytic),
                                format_double(r.estimate), format_double(r.std_error),
                                format_double(r.bound), std::to_string(r.aborts),
                                r.pass ? "1" : "0"});
        }
    } else if (cfg.kind == "threshold") {
        out.header = {"schema", "k", "row", "lo", "hi", "value_lo", "value_hi",
                      "threshold"};
        const ThresholdScanResult res = threshold_scan(cfg);
        std::size_t idx = 0;
        for (const JumpInterval& jump : res.jumps) {
            out.rows.push_back({schema, std::to_string(cfg.k),
                                "jump" + std::to_string(idx++), format_double(jump.lo),
                                format_double(jump.hi), format_double(jump.value_lo),
                                format_double(jump.value_hi),
                                format_double(res.threshold)});
        }
        if (res.jumps.empty()) {
            out.rows.push_back({schema, std::to_string(cfg.k), "nojump", "", "", "",
                                "", format_double(res.threshold)});
        }
    } else if (cfg.kind == "exponent-fit") {
        out.header = {"schema",          "k",     "eps",  "beta_plus",
                      "slope",           "slope_target", "coefficient",
                      "coefficient_target", "max_abs_log_residual", "pass"};
        const FitResult fit = fit_exponent(cfg);
        out.all_pass = fit.pass;
        for (const auto& [eps, bp] : fit.points) {
            out.rows.push_back({schema, std::to_string(cfg.k), format_double(eps),
                                format_double(bp), format_double(fit.slope),
                                format_double(fit.slope_target),
                                format_double(fit.coefficient),
                                format_double(fit.coefficient_target),
                                format_double(fit.max_abs_log_residual),
                                fit.pass ? "1" : "0"});
        }
    } else if (cfg.kind == "core-degree-law") {
        out.header = {"schema",      "k",          "lambda",       "n",
                      "d",           "tv_distance", "tolerance",   "core_size",
                      "conditioned", "rejected",   "child_survival",
                      "child_survival_deeper", "pass"};
        const CoreLawResult res = core_degree_law(cfg);
        out.all_pass = res.pass;
        out.rows.push_back(
            {schema, std::to_string(cfg.k), format_double(cfg.lambda_grid.front()),
             std::to_string(cfg.n_values.front()), std::to_string(cfg.depth),
             format_double(res.tv_distance), format_double(cfg.tolerance),
             std::to_string(res.core_size), std::to_string(res.conditioned),
             std::to_string(res.rejected), format_double(res.child_survival),
             format_double(res.child_survival_deeper), res.pass ? "1" : "0"});
    } else if (cfg.kind == "k2-trend") {
        out.header = {"schema",       "c",
                      "a2",           "a2_asymptote",
                      "a2_ratio",     "beta_plus",
                      "beta_plus_asymptote", "beta_plus_ratio",
                      "flagged",      "ratios_monotone",
                      "all_positive"};
        const K2TrendResult res = k2_trend(cfg);
        out.all_pass = res.ratios_monotone && res.all_positive;
        for (const K2TrendRow& r : res.rows) {
            out.rows.push_back({schema, format_double(r.c), format_double(r.a2),
                                format_double(r.a2_asymptote), format_double(r.a2_ratio),
                                format_double(r.beta_plus),
                                format_double(r.beta_plus_asymptote),
                                format_double(r.beta_plus_ratio), r.flagged ? "1" : "0",
                                res.ratios_monotone ? "1" : "0",
                                res.all_positive ? "1" : "0"});
        }
    } else {
        throw std::invalid_argument("experiment: unknown kind " + cfg.kind);
    }
    return out;
}

inline void write_csv(const ExperimentOutcome& out, std::ostream& os) {
    for (std::size_t i = 0; i < out.header.size(); ++i) {
        os << (i ? "," : "") << out.header[i];
    }
    os << '\n';
    for (const auto& row : out.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << row[i];
        }
        os << '\n';
    }
}

}  // namespace corebp
