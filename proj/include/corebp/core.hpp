#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "corebp/graph.hpp"

// Exact k-core computation. One bucketed min-degree peel yields the core
// number of every vertex (the largest k whose k-core contains it), a
// degeneracy order, and all core sizes at once, in O(n + m).

namespace corebp {

struct CoreResult {
    std::vector<std::uint32_t> core_number;  // per vertex
    std::vector<std::uint32_t> peel_order;   // deletion order of the peel
    std::vector<std::uint64_t> core_sizes;   // index k: #{v : core_number >= k}

    std::uint32_t degeneracy() const {
        return core_sizes.empty() ? 0 : std::uint32_t(core_sizes.size() - 1);
    }
};

// Bucketed peeling: vertices sorted by current degree, lowest first; peeling
// a vertex decrements the stored degree of each remaining higher-degree
// neighbor (the guard keeps degrees from falling under the current level,
// which is what makes the assigned value the core number). Initial order is
// a counting sort by (degree, index), so the whole procedure is a pure
// function of the graph.
inline CoreResult core_numbers(const Graph& g) {
    const std::uint64_t n = g.n;
    CoreResult res;
    res.core_number.assign(n, 0);
    res.peel_order.assign(n, 0);
    if (n == 0) {
        res.core_sizes.assign(1, 0);
        return res;
    }

    std::vector<std::uint32_t> deg(n);
    std::uint32_t max_deg = 0;
    for (std::uint64_t v = 0; v < n; ++v) {
        deg[v] = std::uint32_t(g.degree(v));
        max_deg = std::max(max_deg, deg[v]);
    }

    std::vector<std::uint64_t> bin(max_deg + 2, 0);
    for (std::uint64_t v = 0; v < n; ++v) ++bin[deg[v] + 1];
    for (std::uint32_t d = 0; d <= max_deg; ++d) bin[d + 1] += bin[d];

    std::vector<std::uint32_t> vert(n);
    std::vector<std::uint64_t> pos(n);
    {
        std::vector<std::uint64_t> cursor(bin.begin(), bin.end() - 1);
        for (std::uint64_t v = 0; v < n; ++v) {
            pos[v] = cursor[deg[v]]++;
            vert[pos[v]] = std::uint32_t(v);
        }
    }

    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t v = vert[i];
        res.peel_order[i] = v;
        res.core_number[v] = deg[v];
        for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
            const std::uint32_t u = *it;
            if (deg[u] > deg[v]) {
                // Swap u with the first vertex of its bucket, then shrink
                // the bucket boundary past it and lower its degree.
                const std::uint64_t pu = pos[u];
                const std::uint64_t pw = bin[deg[u]];
                const std::uint32_t w = vert[pw];
                if (u != w) {
                    vert[pu] = w;
                    vert[pw] = u;
                    pos[u] = pw;
                    pos[w] = pu;
                }
                ++bin[deg[u]];
                --deg[u];
            }
        }
    }

    std::uint32_t degeneracy = 0;
    for (std::uint64_t v = 0; v < n; ++v) {
        degeneracy = std::max(degeneracy, res.core_number[v]);
    }
    res.core_sizes.assign(degeneracy + 1, 0);
    for (std::uint64_t v = 0; v < n; ++v) ++res.core_sizes[res.core_number[v]];
    for (std::uint32_t k = degeneracy; k > 0; --k) {
        res.core_sizes[k - 1] += res.core_sizes[k];
    }
    return res;
}

// Testing oracle: repeatedly delete vertices of remaining degree < k until
// none is left; the survivors are the k-core. The result is independent of
// deletion order (the k-core is unique); the priority overload replays a
// caller-chosen order to let tests confirm exactly that.
inline std::vector<std::uint32_t> brute_force_core(const Graph& g, int k) {
    if (k < 0) throw std::domain_error("brute_force_core: k must be >= 0");
    if (g.n > 10000) throw std::invalid_argument("brute_force_core: guard n <= 10^4");
    std::vector<std::uint64_t> deg(g.n);
    std::vector<bool> alive(g.n, true);
    std::vector<std::uint32_t> queue;
    for (std::uint64_t v = 0; v < g.n; ++v) {
        deg[v] = g.degree(v);
        if (deg[v] < std::uint64_t(k)) queue.push_back(std::uint32_t(v));
    }
    while (!queue.empty()) {
        const std::uint32_t v = queue.back();
        queue.pop_back();
        if (!alive[v]) continue;
        alive[v] = false;
        for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
            const std::uint32_t u = *it;
            if (alive[u] && deg[u]-- == std::uint64_t(k)) queue.push_back(u);
        }
    }
    std::vector<std::uint32_t> survivors;
    for (std::uint64_t v = 0; v < g.n; ++v) {
        if (alive[v]) survivors.push_back(std::uint32_t(v));
    }
    return survivors;
}

inline std::vector<std::uint32_t> brute_force_core(
    const Graph& g, int k, const std::vector<std::uint32_t>& priority) {
    if (k < 0) throw std::domain_error("brute_force_core: k must be >= 0");
    if (g.n > 10000) throw std::invalid_argument("brute_force_core: guard n <= 10^4");
    if (priority.size() != g.n) {
        throw std::invalid_argument("brute_force_core: priority must list every vertex");
    }
    std::vector<std::uint64_t> deg(g.n);
    std::vector<bool> alive(g.n, true);
    for (std::uint64_t v = 0; v < g.n; ++v) deg[v] = g.degree(v);
    bool removed = true;
    while (removed) {
        removed = false;
        for (const std::uint32_t v : priority) {
            if (alive[v] && deg[v] < std::uint64_t(k)) {
                alive[v] = false;
                removed = true;
                for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
                    if (alive[*it]) --deg[*it];
                }
                break;  // restart the scan so the replayed order stays exact
            }
        }
    }
    std::vector<std::uint32_t> survivors;
    for (std::uint64_t v = 0; v < g.n; ++v) {
        if (alive[v]) survivors.push_back(std::uint32_t(v));
    }
    return survivors;
}

// Degree histogram inside the induced k-core subgraph; entries below k are
// structurally zero (the k-core has minimum degree >= k).
inline std::vector<std::uint64_t> core_degree_histogram(const Graph& g,
                                                        const CoreResult& cores,
                                                        int k) {
    if (k < 0) throw std::domain_error("core_degree_histogram: k must be >= 0");
    std::vector<std::uint64_t> hist;
    for (std::uint64_t v = 0; v < g.n; ++v) {
        if (cores.core_number[v] < std::uint64_t(k)) continue;
        std::uint64_t d = 0;
        for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
            if (cores.core_number[*it] >= std::uint64_t(k)) ++d;
        }
        if (d >= hist.size()) hist.resize(d + 1, 0);
        ++hist[d];
    }
    return hist;
}

inline std::vector<std::uint64_t> core_degree_histogram(const Graph& g, int k) {
    return core_degree_histogram(g, core_numbers(g), k);
}

inline void write_core_numbers_csv(const CoreResult& res, std::ostream& out) {
    out << "vertex,core_number\n";
    for (std::size_t v = 0; v < res.core_number.size(); ++v) {
        out << v << ',' << res.core_number[v] << '\n';
    }
}

inline void write_core_sizes_csv(const CoreResult& res, std::ostream& out) {
    out << "k,c_k\n";
    for (std::size_t k = 0; k < res.core_sizes.size(); ++k) {
        out << k << ',' << res.core_sizes[k] << '\n';
    }
}

}  // namespace corebp
