#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <vector>

#include "corebp/core.hpp"
#include "corebp/generate.hpp"
#include "corebp/graph.hpp"
#include "corebp/rng.hpp"

#include "support.hpp"

using corebp::brute_force_core;
using corebp::build_graph;
using corebp::core_degree_histogram;
using corebp::core_numbers;
using corebp::CoreResult;
using corebp::degree_histogram;
using corebp::EdgeRule;
using corebp::expected_edge_count;
using corebp::FiniteTypeKernel;
using corebp::generate;
using corebp::generate_reference;
using corebp::GenSpec;
using corebp::Graph;
using corebp::ModelKind;
using corebp::read_edge_list;
using corebp::read_graph_binary;
using corebp::type_assignment;
using corebp::type_block_starts;
using corebp::write_edge_list;
using corebp::write_graph_binary;
using corebp::Xoshiro256;

namespace {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

Graph random_graph(std::uint64_t seed, std::uint32_t n, double p) {
    Xoshiro256 rng(seed);
    std::vector<Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) edges.push_back({i, j});
        }
    }
    return build_graph(n, edges);
}

Graph complete_graph(std::uint32_t n) {
    std::vector<Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) edges.push_back({i, j});
    }
    return build_graph(n, edges);
}

std::vector<std::uint32_t> members_at_least(const CoreResult& res, std::uint32_t k) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t v = 0; v < res.core_number.size(); ++v) {
        if (res.core_number[v] >= k) out.push_back(v);
    }
    return out;
}

std::string to_bytes(const Graph& g) {
    std::ostringstream os(std::ios::binary);
    write_graph_binary(g, os);
    return os.str();
}

}  // namespace

TEST_CASE("complete graph K_{k+1} is exactly a k-core") {
    for (std::uint32_t k : {2u, 3u, 5u}) {
        const Graph g = complete_graph(k + 1);
        const CoreResult res = core_numbers(g);
        for (std::uint32_t v = 0; v <= k; ++v) REQUIRE(res.core_number[v] == k);
        REQUIRE(res.core_sizes.size() == std::size_t(k) + 1);
        CHECK(res.core_sizes[k] == k + 1);
        CHECK(res.core_sizes[0] == k + 1);
        CHECK(res.degeneracy() == k);
    }
}

TEST_CASE("trees peel to core number one") {
    // path, star and a random tree all have empty 2-cores
    std::vector<Edge> path = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    const CoreResult p = core_numbers(build_graph(5, path));
    for (std::uint32_t v = 0; v < 5; ++v) CHECK(p.core_number[v] == 1);

    std::vector<Edge> star = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
    const CoreResult s = core_numbers(build_graph(6, star));
    for (std::uint32_t v = 0; v < 6; ++v) CHECK(s.core_number[v] == 1);
    CHECK(s.core_sizes[1] == 6);
    CHECK(s.core_sizes.size() == 2);

    const CoreResult lone = core_numbers(build_graph(1, {}));
    CHECK(lone.core_number[0] == 0);
    CHECK(lone.core_sizes == std::vector<std::uint64_t>{1});
}

TEST_CASE("cycle with a pendant vertex") {
    std::vector<Edge> edges = {{0, 1}, {0, 4}, {1, 2}, {2, 3}, {2, 5}, {3, 4}};
    const CoreResult res = core_numbers(build_graph(6, edges));
    for (std::uint32_t v = 0; v < 5; ++v) CHECK(res.core_number[v] == 2);
    CHECK(res.core_number[5] == 1);
    CHECK(res.core_sizes[2] == 5);
    CHECK(res.core_sizes[1] == 6);
}

TEST_CASE("peeling equals iterated deletion on random graphs") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::uint32_t n = 4 + std::uint32_t(seed % 61);
        const Graph g = random_graph(seed * 977 + 5, n, 3.0 / double(n));
        const CoreResult res = core_numbers(g);
        const std::uint32_t kmax = res.degeneracy();
        for (std::uint32_t k = 0; k <= kmax + 1; ++k) {
            REQUIRE(members_at_least(res, k) == brute_force_core(g, int(k)));
        }
    }
}

TEST_CASE("deletion order does not change the core") {
    Xoshiro256 shuffler(99);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::uint32_t n = 8 + std::uint32_t(seed % 40);
        const Graph g = random_graph(seed * 31 + 7, n, 4.0 / double(n));
        const std::vector<std::uint32_t> base = brute_force_core(g, 3);
        std::vector<std::uint32_t> priority(n);
        std::iota(priority.begin(), priority.end(), 0);
        for (int rep = 0; rep < 5; ++rep) {
            for (std::uint32_t i = n - 1; i > 0; --i) {
                const std::uint32_t j =
                    std::uint32_t(shuffler.next() % std::uint64_t(i + 1));
                std::swap(priority[i], priority[j]);
            }
            REQUIRE(brute_force_core(g, 3, priority) == base);
        }
    }
}

TEST_CASE("peeled core equals the union of qualifying subsets") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::uint32_t n = 1 + std::uint32_t(seed % 12);
        const Graph g = random_graph(seed * 131 + 3, n, 0.4);
        const CoreResult res = core_numbers(g);
        for (int k : {1, 2, 3}) {
            const std::vector<bool> mask = oracle::exhaustive_core_mask(g, k);
            for (std::uint32_t v = 0; v < n; ++v) {
                REQUIRE((res.core_number[v] >= std::uint32_t(k)) == mask[v]);
            }
        }
    }
}

TEST_CASE("core structure invariants") {
    const Graph g = random_graph(4242, 300, 0.02);
    const CoreResult res = core_numbers(g);

    // nesting: the (k+1)-core sits inside the k-core
    for (std::uint32_t k = 0; k + 1 < res.core_sizes.size(); ++k) {
        REQUIRE(res.core_sizes[k] >= res.core_sizes[k + 1]);
    }
    REQUIRE(res.core_sizes[0] == g.n);

    // peel order: core numbers are nondecreasing along it, nobody leaves with
    // more unpeeled neighbors than their core number (a same-level neighbor
    // peeling first can push the removal degree below it) and the largest
    // removal degree is exactly the degeneracy
    std::vector<bool> peeled(g.n, false);
    std::uint32_t prev_core = 0;
    std::uint64_t max_remaining = 0;
    for (const std::uint32_t v : res.peel_order) {
        REQUIRE(!peeled[v]);
        std::uint64_t remaining = 0;
        for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
            if (!peeled[*it]) ++remaining;
        }
        REQUIRE(res.core_number[v] >= prev_core);
        REQUIRE(remaining <= res.core_number[v]);
        max_remaining = std::max(max_remaining, remaining);
        prev_core = res.core_number[v];
        peeled[v] = true;
    }
    REQUIRE(max_remaining == res.degeneracy());

    // adding one edge never lowers any core number
    Xoshiro256 rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        std::uint32_t a = std::uint32_t(rng.next() % g.n);
        std::uint32_t b = std::uint32_t(rng.next() % g.n);
        if (a == b || g.has_edge(a, b)) continue;
        std::vector<Edge> edges;
        for (std::uint32_t v = 0; v < g.n; ++v) {
            for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
                if (*it > v) edges.push_back({v, *it});
            }
        }
        edges.push_back({std::min(a, b), std::max(a, b)});
        std::sort(edges.begin(), edges.end());
        const CoreResult grown = core_numbers(build_graph(g.n, edges));
        for (std::uint32_t v = 0; v < g.n; ++v) {
            REQUIRE(grown.core_number[v] >= res.core_number[v]);
        }
    }
}

TEST_CASE("induced degrees inside the core meet the bound") {
    const Graph g = random_graph(515, 400, 0.015);
    const CoreResult res = core_numbers(g);
    for (int k = 1; int(k) <= int(res.degeneracy()); ++k) {
        const auto hist = core_degree_histogram(g, res, k);
        std::uint64_t total = 0;
        for (std::size_t d = 0; d < hist.size(); ++d) {
            if (d < std::size_t(k)) REQUIRE(hist[d] == 0);
            total += hist[d];
        }
        REQUIRE(total == (std::size_t(k) < res.core_sizes.size()
                              ? res.core_sizes[k]
                              : 0));
    }
}

TEST_CASE("degree histogram accounting") {
    const Graph g = random_graph(808, 250, 0.03);
    const auto hist = degree_histogram(g);
    std::uint64_t total = 0, weighted = 0;
    for (std::size_t d = 0; d < hist.size(); ++d) {
        total += hist[d];
        weighted += d * hist[d];
    }
    CHECK(total == g.n);
    CHECK(weighted == 2 * g.m());
}

TEST_CASE("core csv writers") {
    std::vector<Edge> edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}};
    const CoreResult res = core_numbers(build_graph(4, edges));
    std::ostringstream numbers;
    corebp::write_core_numbers_csv(res, numbers);
    CHECK(numbers.str() == "vertex,core_number\n0,2\n1,2\n2,2\n3,1\n");
    std::ostringstream sizes;
    corebp::write_core_sizes_csv(res, sizes);
    CHECK(sizes.str() == "k,c_k\n0,4\n1,4\n2,3\n");
}

TEST_CASE("brute force guards") {
    const Graph g = random_graph(1, 10, 0.3);
    CHECK_THROWS_AS(brute_force_core(g, -1), std::domain_error);
    Graph big;
    big.n = 10001;
    big.offsets.assign(big.n + 1, 0);
    CHECK_THROWS_AS(brute_force_core(big, 2), std::invalid_argument);
}

TEST_CASE("graph validation catches corruption") {
    Graph g = random_graph(3, 20, 0.2);
    CHECK_NOTHROW(g.validate());

    std::uint32_t v = 0;
    while (g.degree(v) == 0) ++v;

    Graph loop = g;
    loop.adjacency[loop.offsets[v]] = v;  // self loop
    CHECK_THROWS_AS(loop.validate(), std::invalid_argument);

    Graph broken = g;
    // redirect one endpoint without fixing the mirror entry; depending on the
    // neighborhood this surfaces as a loop, a duplicate or an asymmetric edge
    broken.adjacency[broken.offsets[v]] += 1;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("binary graph layout is stable and little-endian") {
    const Graph g = build_graph(2, {{0, 1}});
    const std::string bytes = to_bytes(g);
    // magic + version + n + m + offsets[3] + adjacency[2], all 64-bit
    REQUIRE(bytes.size() == 8 + 8 + 8 + 8 + 24 + 16);
    CHECK(bytes.substr(0, 8) == "COREBPGR");
    const auto u64_at = [&](std::size_t pos) {
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) {
            x |= std::uint64_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        }
        return x;
    };
    CHECK(u64_at(8) == 1);    // version
    CHECK(u64_at(16) == 2);   // n
    CHECK(u64_at(24) == 1);   // m
    CHECK(u64_at(32) == 0);   // offsets
    CHECK(u64_at(40) == 1);
    CHECK(u64_at(48) == 2);
    CHECK(u64_at(56) == 1);   // adjacency of vertex 0
    CHECK(u64_at(64) == 0);   // adjacency of vertex 1
}

TEST_CASE("binary round trip is byte-exact") {
    GenSpec spec;
    spec.model = ModelKind::rank1_power_law;
    spec.c = 1.2;
    spec.seed = 17;
    const Graph g = generate(spec, 500);
    const std::string first = to_bytes(g);
    std::istringstream in(first, std::ios::binary);
    const Graph back = read_graph_binary(in);
    CHECK(to_bytes(back) == first);
    CHECK(back.n == g.n);
    CHECK(back.adjacency == g.adjacency);
}

TEST_CASE("binary reader rejects corrupted input") {
    const Graph g = build_graph(3, {{0, 1}, {1, 2}});
    std::string bytes = to_bytes(g);

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    std::istringstream m(bad_magic, std::ios::binary);
    CHECK_THROWS_AS(read_graph_binary(m), std::runtime_error);

    std::string bad_version = bytes;
    bad_version[8] = 9;
    std::istringstream v(bad_version, std::ios::binary);
    CHECK_THROWS_AS(read_graph_binary(v), std::runtime_error);

    std::string truncated = bytes.substr(0, bytes.size() - 3);
    std::istringstream t(truncated, std::ios::binary);
    CHECK_THROWS_AS(read_graph_binary(t), std::runtime_error);
}

TEST_CASE("edge list round trip and tolerant parsing") {
    const Graph g = random_graph(77, 30, 0.15);
    std::ostringstream out;
    write_edge_list(g, out);
    std::istringstream in(out.str());
    const Graph back = read_edge_list(in, g.n);
    CHECK(back.adjacency == g.adjacency);
    CHECK(back.offsets == g.offsets);

    std::istringstream messy(
        "# comment line\n"
        "1 0\n"
        "\n"
        "0 2\n"
        "2 1\n"
        "1 2\n");  // duplicate in both orders collapses to one edge
    const Graph parsed = read_edge_list(messy);
    CHECK(parsed.n == 3);
    CHECK(parsed.m() == 3);

    std::istringstream loopy("0 0\n");
    CHECK_THROWS_AS(read_edge_list(loopy), std::runtime_error);

    std::istringstream out_of_range("0 5\n");
    CHECK_THROWS_AS(read_edge_list(out_of_range, 3), std::runtime_error);
}

TEST_CASE("generation is deterministic and thread-count invariant") {
    GenSpec spec;
    spec.model = ModelKind::rank1_power_law;
    spec.c = 1.3;
    spec.seed = 2024;
    const Graph g1 = generate(spec, 3000);
    const Graph g2 = generate(spec, 3000);
    const Graph g4 = generate(spec, 3000, 4);
    CHECK(to_bytes(g1) == to_bytes(g2));
    CHECK(to_bytes(g1) == to_bytes(g4));

    spec.seed = 2025;
    const Graph other = generate(spec, 3000);
    CHECK(to_bytes(other) != to_bytes(g1));

    GenSpec er;
    er.model = ModelKind::erdos_renyi;
    er.lambda = 3.0;
    er.seed = 5;
    CHECK(to_bytes(generate(er, 2000, 3)) == to_bytes(generate(er, 2000)));

    FiniteTypeKernel kern;
    kern.kappa = {{4.0, 1.0}, {1.0, 2.0}};
    kern.mu = {0.3, 0.7};
    GenSpec ft;
    ft.model = ModelKind::finite_type;
    ft.kernel = kern;
    ft.seed = 11;
    CHECK(to_bytes(generate(ft, 2000, 4)) == to_bytes(generate(ft, 2000)));
}

TEST_CASE("every generated graph validates") {
    std::vector<GenSpec> specs;
    GenSpec er;
    er.model = ModelKind::erdos_renyi;
    er.lambda = 4.0;
    specs.push_back(er);
    er.edge_rule = EdgeRule::odds;
    specs.push_back(er);
    GenSpec r1;
    r1.model = ModelKind::rank1_power_law;
    r1.c = 1.0;
    specs.push_back(r1);
    r1.edge_rule = EdgeRule::odds;
    specs.push_back(r1);
    GenSpec ft;
    ft.model = ModelKind::finite_type;
    ft.kernel.kappa = {{5.0, 0.5}, {0.5, 3.0}};
    ft.kernel.mu = {0.5, 0.5};
    specs.push_back(ft);

    for (std::size_t i = 0; i < specs.size(); ++i) {
        GenSpec spec = specs[i];
        spec.seed = 100 + i;
        const Graph g = generate(spec, 1500);
        CHECK_NOTHROW(g.validate());
        const Graph ref = generate_reference(spec, 300);
        CHECK_NOTHROW(ref.validate());
    }
}

TEST_CASE("type blocks cover the vertex range in proportion") {
    FiniteTypeKernel kern;
    kern.kappa = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    kern.mu = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const auto starts = type_block_starts(kern, 10);
    CHECK(starts == std::vector<std::uint64_t>{0, 3, 6, 10});
    const auto types = type_assignment(kern, 10);
    CHECK(types == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1, 2, 2, 2, 2});

    kern.kappa = {{1.0, 0.0}, {0.0, 1.0}};
    kern.mu = {0.3, 0.7};
    CHECK(type_block_starts(kern, 10) == std::vector<std::uint64_t>{0, 3, 10});
}

namespace {

// empirical per-pair edge frequencies against the analytic probabilities,
// for any sampler sharing GenSpec semantics
template <typename Sampler>
void check_edge_frequencies(const GenSpec& base, std::uint32_t n,
                            std::uint64_t trials, Sampler&& sample) {
    std::vector<std::vector<std::uint64_t>> count(n,
                                                  std::vector<std::uint64_t>(n, 0));
    for (std::uint64_t s = 0; s < trials; ++s) {
        GenSpec spec = base;
        spec.seed = s;
        const Graph g = sample(spec, n);
        for (std::uint32_t v = 0; v < n; ++v) {
            for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
                if (*it > v) ++count[v][*it];
            }
        }
    }
    std::vector<std::uint32_t> types;
    if (base.model == ModelKind::finite_type) types = type_assignment(base.kernel, n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            double p = 0.0;
            switch (base.model) {
                case ModelKind::erdos_renyi:
                    p = corebp::detail::apply_edge_rule(base.lambda, double(n),
                                                        base.edge_rule);
                    break;
                case ModelKind::rank1_power_law:
                    p = corebp::detail::rank1_pair_prob(base.c, double(i + 1),
                                                        double(j + 1), base.edge_rule);
                    break;
                case ModelKind::finite_type:
                    p = corebp::detail::apply_edge_rule(
                        base.kernel.kappa[types[i]][types[j]], double(n),
                        base.edge_rule);
                    break;
            }
            const double freq = double(count[i][j]) / double(trials);
            const double sigma = std::sqrt(p * (1.0 - p) / double(trials));
            REQUIRE(std::fabs(freq - p) <= 4.0 * sigma + 1e-12);
        }
    }
}

}  // namespace

TEST_CASE("edge frequencies match the model probabilities") {
    const std::uint64_t trials = 40000;
    const auto fast = [](const GenSpec& spec, std::uint64_t n) {
        return generate(spec, n);
    };
    const auto reference = [](const GenSpec& spec, std::uint64_t n) {
        return generate_reference(spec, n);
    };

    GenSpec er;
    er.model = ModelKind::erdos_renyi;
    er.lambda = 3.0;
    check_edge_frequencies(er, 6, trials, fast);
    check_edge_frequencies(er, 6, trials, reference);
    er.edge_rule = EdgeRule::odds;
    check_edge_frequencies(er, 6, trials, fast);

    GenSpec r1;
    r1.model = ModelKind::rank1_power_law;
    r1.c = 1.4;  // deterministic prefix, capped and fractional cells
    check_edge_frequencies(r1, 6, trials, fast);
    check_edge_frequencies(r1, 6, trials, reference);
    r1.edge_rule = EdgeRule::odds;
    check_edge_frequencies(r1, 6, trials, fast);

    GenSpec ft;
    ft.model = ModelKind::finite_type;
    ft.kernel.kappa = {{4.0, 1.0}, {1.0, 2.5}};
    ft.kernel.mu = {0.5, 0.5};
    check_edge_frequencies(ft, 6, trials, fast);
    check_edge_frequencies(ft, 6, trials, reference);
}

TEST_CASE("skip sampling matches the reference sampler in distribution") {
    // KS over the pooled degree distribution across many seeds
    GenSpec spec;
    spec.model = ModelKind::erdos_renyi;
    spec.lambda = 0.9;
    const std::uint32_t n = 50;
    std::vector<std::uint64_t> fast_hist, ref_hist;
    const auto tally = [&](const Graph& g, std::vector<std::uint64_t>& hist) {
        for (std::uint32_t v = 0; v < g.n; ++v) {
            const std::uint64_t d = g.degree(v);
            if (hist.size() <= d) hist.resize(d + 1, 0);
            ++hist[d];
        }
    };
    for (std::uint64_t s = 0; s < 1000; ++s) {
        GenSpec a = spec;
        a.seed = s;
        tally(generate(a, n), fast_hist);
        a.seed = s + 500000;  // disjoint seed range, independent streams
        tally(generate_reference(a, n), ref_hist);
    }
    const double d = oracle::ks_statistic(fast_hist, ref_hist);
    const double crit =
        oracle::ks_critical(double(1000 * n), double(1000 * n), 1e-3);
    REQUIRE(d <= crit);
}

TEST_CASE("expected edge count tracks the empirical mean") {
    const std::uint64_t trials = 3000;
    std::vector<GenSpec> specs;
    GenSpec er;
    er.model = ModelKind::erdos_renyi;
    er.lambda = 2.5;
    specs.push_back(er);
    GenSpec r1;
    r1.model = ModelKind::rank1_power_law;
    r1.c = 1.1;
    specs.push_back(r1);
    r1.edge_rule = EdgeRule::odds;
    specs.push_back(r1);
    GenSpec ft;
    ft.model = ModelKind::finite_type;
    ft.kernel.kappa = {{3.0, 1.0}, {1.0, 2.0}};
    ft.kernel.mu = {0.4, 0.6};
    specs.push_back(ft);

    for (const GenSpec& base : specs) {
        const std::uint32_t n = 40;
        const double expected = expected_edge_count(base, n);
        double total = 0.0;
        for (std::uint64_t s = 0; s < trials; ++s) {
            GenSpec spec = base;
            spec.seed = 7777 + s;
            total += double(generate(spec, n).m());
        }
        const double mean = total / double(trials);
        // edge indicators are independent, so Var(m) <= E[m]
        const double sigma = std::sqrt(expected / double(trials));
        REQUIRE(std::fabs(mean - expected) <= 4.0 * sigma);
    }
}

TEST_CASE("edge budget refuses instead of truncating") {
    GenSpec spec;
    spec.model = ModelKind::erdos_renyi;
    spec.lambda = 10.0;
    spec.max_edges = 50;
    CHECK_THROWS_AS(generate(spec, 1000), std::runtime_error);
}

TEST_CASE("generator argument validation") {
    GenSpec spec;
    spec.model = ModelKind::erdos_renyi;
    spec.lambda = -1.0;
    CHECK_THROWS_AS(generate(spec, 100), std::invalid_argument);
    spec.lambda = 1.0;
    CHECK_THROWS_AS(generate(spec, 0), std::invalid_argument);

    GenSpec r1;
    r1.model = ModelKind::rank1_power_law;
    r1.c = 0.0;
    CHECK_THROWS_AS(generate(r1, 100), std::invalid_argument);

    GenSpec ft;
    ft.model = ModelKind::finite_type;
    ft.kernel.kappa = {{1.0, 2.0}, {2.5, 1.0}};
    ft.kernel.mu = {0.5, 0.5};
    CHECK_THROWS_AS(generate(ft, 100), std::invalid_argument);

    GenSpec ref_guard;
    ref_guard.model = ModelKind::erdos_renyi;
    ref_guard.lambda = 1.0;
    CHECK_THROWS_AS(generate_reference(ref_guard, 20001), std::invalid_argument);
}
