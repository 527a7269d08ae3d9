// Command-line front end. Subcommands map onto the library surface:
//
//   solve       fixed-point core fraction for one parameter point
//   threshold   critical parameter for the selected model
//   gen         write a sampled graph to disk (binary or edge list)
//   core        peel a graph file and emit core numbers or core sizes
//   bp          Monte-Carlo branching-process estimate
//   experiment  JSON-config-driven sweep with CSV output
//
// Exit codes: 0 success, 1 validation error (bad flags, config, input),
// 2 tolerance failure inside an experiment.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "corebp/corebp.hpp"

namespace {

corebp::FiniteTypeKernel load_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open kernel config: " + path);
    nlohmann::json j;
    in >> j;
    return corebp::detail::kernel_from_json(j);
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output: " + path);
    return file;
}

corebp::Graph read_graph_file(const std::string& path) {
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) throw std::invalid_argument("cannot open graph: " + path);
        char magic[8] = {};
        probe.read(magic, 8);
        if (probe.gcount() == 8 &&
            std::equal(magic, magic + 8, corebp::kGraphMagic)) {
            return corebp::read_graph_binary(path);
        }
    }
    std::ifstream in(path);
    return corebp::read_edge_list(in);
}

struct ModelFlags {
    std::string model = "erdos_renyi";
    std::string edge_rule = "capped";
    double lambda = -1.0;
    double c = -1.0;
    std::string kernel_path;

    void attach(CLI::App* cmd, bool with_rule) {
        cmd->add_option("--model", model, "erdos_renyi | rank1_power_law | finite_type")
            ->check(CLI::IsMember({"erdos_renyi", "rank1_power_law", "finite_type"}));
        cmd->add_option("--lambda", lambda, "mean degree parameter (erdos_renyi)");
        cmd->add_option("--c", c, "kernel strength (rank1_power_law)");
        cmd->add_option("--config", kernel_path, "kernel JSON file (finite_type)");
        if (with_rule) {
            cmd->add_option("--edge-rule", edge_rule, "capped | odds")
                ->check(CLI::IsMember({"capped", "odds"}));
        }
    }

    // Infer the model from whichever parameter flag was given, so plain
    // `solve --k 3 --lambda 4` works without --model.
    void resolve() {
        if (!kernel_path.empty() && model == "erdos_renyi" && lambda < 0.0 && c < 0.0) {
            model = "finite_type";
        }
        if (c >= 0.0 && model == "erdos_renyi" && lambda < 0.0) {
            model = "rank1_power_law";
        }
        if (model == "erdos_renyi" && lambda < 0.0) {
            throw std::invalid_argument("erdos_renyi model needs --lambda");
        }
        if (model == "rank1_power_law" && c < 0.0) {
            throw std::invalid_argument("rank1_power_law model needs --c");
        }
        if (model == "finite_type" && kernel_path.empty()) {
            throw std::invalid_argument("finite_type model needs --config");
        }
    }

    corebp::ModelKind kind() const {
        if (model == "erdos_renyi") return corebp::ModelKind::erdos_renyi;
        if (model == "rank1_power_law") return corebp::ModelKind::rank1_power_law;
        return corebp::ModelKind::finite_type;
    }

    double param() const {
        if (model == "erdos_renyi") return lambda;
        if (model == "rank1_power_law") return c;
        return lambda >= 0.0 ? lambda : 1.0;  // kernel scale
    }

    corebp::ExperimentConfig base_config(int k) const {
        corebp::ExperimentConfig cfg;
        cfg.k = k;
        cfg.model = kind();
        cfg.edge_rule = edge_rule == "odds" ? corebp::EdgeRule::odds
                                            : corebp::EdgeRule::capped;
        if (!kernel_path.empty()) {
            cfg.kernel = load_kernel(kernel_path);
            cfg.has_kernel = true;
        }
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"asymptotic k-core sizes of sparse random graphs"};
    app.require_subcommand(1);

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "solve the core-fraction fixed point");
    int solve_k = 3;
    ModelFlags solve_model;
    std::string solve_out, solve_format = "csv";
    solve_cmd->add_option("--k", solve_k, "core order (k >= 2)");
    solve_model.attach(solve_cmd, false);
    solve_cmd->add_option("--out", solve_out, "output path (default stdout)");
    solve_cmd->add_option("--format", solve_format, "csv | text")
        ->check(CLI::IsMember({"csv", "text"}));

    // threshold
    auto* thr_cmd = app.add_subcommand("threshold", "critical parameter of the model");
    int thr_k = 3;
    ModelFlags thr_model;
    std::string thr_out, thr_format = "csv";
    thr_cmd->add_option("--k", thr_k, "core order (k >= 2)");
    thr_cmd->add_option("--model", thr_model.model, "erdos_renyi | rank1_power_law")
        ->check(CLI::IsMember({"erdos_renyi", "rank1_power_law"}));
    thr_cmd->add_option("--out", thr_out, "output path (default stdout)");
    thr_cmd->add_option("--format", thr_format, "csv | text")
        ->check(CLI::IsMember({"csv", "text"}));

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "sample a graph and write it to disk");
    std::uint64_t gen_n = 0, gen_seed = 0;
    unsigned gen_threads = 1;
    ModelFlags gen_model;
    std::string gen_out, gen_format = "binary";
    gen_cmd->add_option("--n", gen_n, "number of vertices")->required();
    gen_model.attach(gen_cmd, true);
    gen_cmd->add_option("--seed", gen_seed, "master seed");
    gen_cmd->add_option("--threads", gen_threads, "row-range workers");
    gen_cmd->add_option("--out", gen_out, "output path")->required();
    gen_cmd->add_option("--format", gen_format, "binary | edges")
        ->check(CLI::IsMember({"binary", "edges"}));

    // core
    auto* core_cmd = app.add_subcommand("core", "peel a graph file");
    std::string core_in, core_out, core_format = "csv";
    bool core_numbers_flag = false;
    core_cmd->add_option("--in", core_in, "graph file (binary or edge list)")
        ->required();
    core_cmd->add_flag("--numbers", core_numbers_flag,
                       "emit per-vertex core numbers instead of core sizes");
    core_cmd->add_option("--out", core_out, "output path (default stdout)");
    core_cmd->add_option("--format", core_format, "csv")
        ->check(CLI::IsMember({"csv"}));

    // bp
    auto* bp_cmd = app.add_subcommand("bp", "Monte-Carlo branching-process estimate");
    int bp_k = 3;
    double bp_lambda = -1.0;
    std::size_t bp_depth = 10, bp_samples = 100000;
    std::uint64_t bp_seed = 0, bp_cap = 10000000;
    int bp_root_type = -1;
    unsigned bp_threads = 1;
    std::string bp_variant = "B", bp_kernel_path, bp_out, bp_format = "csv";
    bp_cmd->add_option("--k", bp_k, "core order (k >= 2)");
    bp_cmd->add_option("--lambda", bp_lambda, "offspring mean (single-type)");
    bp_cmd->add_option("--config", bp_kernel_path, "kernel JSON file (multi-type)");
    bp_cmd->add_option("--root-type", bp_root_type,
                       "fixed root type index, -1 draws from the type law");
    bp_cmd->add_option("--d", bp_depth, "recursion depth");
    bp_cmd->add_option("--samples", bp_samples, "trial count");
    bp_cmd->add_option("--seed", bp_seed, "master seed");
    bp_cmd->add_option("--particle-cap", bp_cap, "per-trial node budget");
    bp_cmd->add_option("--threads", bp_threads, "worker threads");
    bp_cmd->add_option("--variant", bp_variant, "B | Bplus")
        ->check(CLI::IsMember({"B", "Bplus"}));
    bp_cmd->add_option("--out", bp_out, "output path (default stdout)");
    bp_cmd->add_option("--format", bp_format, "csv | text")
        ->check(CLI::IsMember({"csv", "text"}));

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run a JSON-configured sweep");
    std::string exp_config, exp_out;
    std::uint64_t exp_seed = 0;
    bool exp_seed_set = false;
    std::string exp_format = "csv";
    exp_cmd->add_option("--config", exp_config, "experiment JSON file")->required();
    exp_cmd->add_option("--out", exp_out, "CSV path (overrides config)");
    exp_cmd
        ->add_option_function<std::uint64_t>(
            "--seed",
            [&](const std::uint64_t s) {
                exp_seed = s;
                exp_seed_set = true;
            },
            "replace the config seed list with one seed")
        ->expected(1);
    exp_cmd->add_option("--format", exp_format, "csv")
        ->check(CLI::IsMember({"csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*solve_cmd) {
        solve_model.resolve();
        corebp::ExperimentConfig cfg = solve_model.base_config(solve_k);
        cfg.kind = "solve";
        if (cfg.model == corebp::ModelKind::rank1_power_law) {
            cfg.c_grid = {solve_model.param()};
        } else {
            cfg.lambda_grid = {solve_model.param()};
        }
        std::ofstream file;
        std::ostream& os = open_out(file, solve_out);
        if (solve_format == "csv") {
            corebp::write_csv(corebp::run_experiment(cfg), os);
        } else {
            const corebp::SolveRow row = corebp::solve_grid(cfg).front();
            os << "param " << corebp::detail::format_double(row.param) << '\n'
               << "beta " << corebp::detail::format_double(row.beta) << '\n'
               << "beta_plus " << corebp::detail::format_double(row.beta_plus) << '\n'
               << "residual " << corebp::detail::format_double(row.residual) << '\n'
               << "iterations " << row.iterations << '\n'
               << "converged " << (row.converged ? 1 : 0) << '\n'
               << "near_critical " << (row.near_critical ? 1 : 0) << '\n';
        }
        return 0;
    }

    if (*thr_cmd) {
        corebp::ExperimentConfig cfg;
        cfg.kind = "threshold";
        cfg.k = thr_k;
        cfg.model = thr_model.model == "rank1_power_law"
                        ? corebp::ModelKind::rank1_power_law
                        : corebp::ModelKind::erdos_renyi;
        const corebp::ThresholdScanResult res = corebp::threshold_scan(cfg);
        std::ofstream file;
        std::ostream& os = open_out(file, thr_out);
        if (thr_format == "csv") {
            corebp::ExperimentOutcome out;
            out.kind = cfg.kind;
            out.header = {"schema", "k", "model", "threshold"};
            out.rows = {{"threshold/v1", std::to_string(thr_k), thr_model.model,
                         corebp::detail::format_double(res.threshold)}};
            corebp::write_csv(out, os);
        } else {
            os << "threshold " << corebp::detail::format_double(res.threshold) << '\n';
        }
        return 0;
    }

    if (*gen_cmd) {
        gen_model.resolve();
        corebp::GenSpec spec;
        spec.model = gen_model.kind();
        spec.edge_rule = gen_model.edge_rule == "odds" ? corebp::EdgeRule::odds
                                                       : corebp::EdgeRule::capped;
        spec.seed = gen_seed;
        if (spec.model == corebp::ModelKind::erdos_renyi) {
            spec.lambda = gen_model.lambda;
        } else if (spec.model == corebp::ModelKind::rank1_power_law) {
            spec.c = gen_model.c;
        } else {
            spec.kernel = load_kernel(gen_model.kernel_path);
            if (gen_model.lambda >= 0.0) {
                spec.kernel = spec.kernel.scaled(gen_model.lambda);
            }
        }
        const corebp::Graph g = corebp::generate(spec, gen_n, gen_threads);
        if (gen_format == "binary") {
            corebp::write_graph_binary(g, gen_out);
        } else {
            std::ofstream file(gen_out);
            if (!file) throw std::invalid_argument("cannot open output: " + gen_out);
            corebp::write_edge_list(g, file);
        }
        std::cerr << "n " << g.n << " m " << g.m() << '\n';
        return 0;
    }

    if (*core_cmd) {
        const corebp::Graph g = read_graph_file(core_in);
        const corebp::CoreResult res = corebp::core_numbers(g);
        std::ofstream file;
        std::ostream& os = open_out(file, core_out);
        if (core_numbers_flag) {
            corebp::write_core_numbers_csv(res, os);
        } else {
            corebp::write_core_sizes_csv(res, os);
        }
        return 0;
    }

    if (*bp_cmd) {
        corebp::BPConfig cfg;
        cfg.depth = bp_depth;
        cfg.samples = bp_samples;
        cfg.seed = bp_seed;
        cfg.particle_cap = bp_cap;
        cfg.threads = bp_threads;
        corebp::BPEstimate est;
        std::string kernel_label;
        double lambda_col = 0.0;
        if (!bp_kernel_path.empty()) {
            if (bp_variant != "B") {
                throw std::invalid_argument("bp: --config supports only --variant B");
            }
            const corebp::FiniteTypeKernel kern = load_kernel(bp_kernel_path);
            est = corebp::estimate_B_d_multitype(kern, bp_k, bp_root_type, cfg);
            kernel_label = "finite_type";
        } else {
            if (bp_lambda < 0.0) throw std::invalid_argument("bp: needs --lambda");
            est = bp_variant == "Bplus" ? corebp::estimate_Bplus_d(bp_k, bp_lambda, cfg)
                                        : corebp::estimate_B_d(bp_k, bp_lambda, cfg);
            kernel_label = "poisson";
            lambda_col = bp_lambda;
        }
        std::ofstream file;
        std::ostream& os = open_out(file, bp_out);
        if (bp_format == "csv") {
            corebp::write_bp_estimate_csv_header(os);
            corebp::write_bp_estimate_csv_row(os, bp_k, lambda_col, kernel_label,
                                              bp_depth, est);
        } else {
            os << "estimate " << corebp::detail::format_double(est.estimate) << '\n'
               << "std_error " << corebp::detail::format_double(est.std_error) << '\n'
               << "successes " << est.successes << '\n'
               << "trials " << est.trials << '\n'
               << "aborts " << est.aborts << '\n';
        }
        return 0;
    }

    if (*exp_cmd) {
        corebp::ExperimentConfig cfg = corebp::ExperimentConfig::from_file(exp_config);
        if (exp_seed_set) cfg.seeds = {exp_seed};
        if (!exp_out.empty()) cfg.out = exp_out;
        const corebp::ExperimentOutcome out = corebp::run_experiment(cfg);
        std::ofstream file;
        std::ostream& os = open_out(file, cfg.out);
        corebp::write_csv(out, os);
        return out.all_pass ? 0 : 2;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
