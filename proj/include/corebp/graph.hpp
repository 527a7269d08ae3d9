#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Immutable compressed-sparse-row graph: simple, undirected, every edge
// stored in both endpoint lists, neighbor lists sorted ascending. Vertex ids
// are 0-based uint32 in memory; the binary file format uses 64-bit
// little-endian integers throughout for interchange.

namespace corebp {

struct Graph {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> offsets;    // length n + 1
    std::vector<std::uint32_t> adjacency;  // length 2m, sorted per vertex

    std::uint64_t m() const { return adjacency.size() / 2; }

    std::uint64_t degree(std::uint64_t v) const {
        return offsets[v + 1] - offsets[v];
    }

    const std::uint32_t* neighbors_begin(std::uint64_t v) const {
        return adjacency.data() + offsets[v];
    }
    const std::uint32_t* neighbors_end(std::uint64_t v) const {
        return adjacency.data() + offsets[v + 1];
    }

    bool has_edge(std::uint64_t u, std::uint64_t v) const {
        return std::binary_search(neighbors_begin(u), neighbors_end(u),
                                  std::uint32_t(v));
    }

    // Throws when any structural invariant fails: offsets malformed, ids out
    // of range, loops, duplicate or asymmetric entries, unsorted lists.
    void validate() const {
        if (offsets.size() != n + 1 || offsets[0] != 0 ||
            offsets[n] != adjacency.size()) {
            throw std::invalid_argument("Graph: malformed offsets");
        }
        if (adjacency.size() % 2 != 0) {
            throw std::invalid_argument("Graph: odd adjacency length");
        }
        for (std::uint64_t v = 0; v < n; ++v) {
            if (offsets[v] > offsets[v + 1]) {
                throw std::invalid_argument("Graph: offsets not nondecreasing");
            }
            for (std::uint64_t e = offsets[v]; e < offsets[v + 1]; ++e) {
                const std::uint32_t u = adjacency[e];
                if (u >= n) throw std::invalid_argument("Graph: neighbor out of range");
                if (u == v) throw std::invalid_argument("Graph: loop");
                if (e > offsets[v] && adjacency[e - 1] >= u) {
                    throw std::invalid_argument("Graph: unsorted or duplicate neighbors");
                }
                if (!has_edge(u, v)) {
                    throw std::invalid_argument("Graph: asymmetric edge");
                }
            }
        }
    }
};

// Builds the CSR structure from unordered unique undirected edges {i, j},
// i != j. Edges listed in lexicographic (i, j) order with i < j fill both
// directions in ascending order, so no per-row sort is needed; any other
// order is handled by sorting rows afterwards.
inline Graph build_graph(std::uint64_t n,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                         bool lexicographic = true) {
    Graph g;
    g.n = n;
    g.offsets.assign(n + 1, 0);
    for (const auto& [a, b] : edges) {
        ++g.offsets[std::uint64_t(a) + 1];
        ++g.offsets[std::uint64_t(b) + 1];
    }
    for (std::uint64_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];
    g.adjacency.resize(edges.size() * 2);
    std::vector<std::uint64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& [a, b] : edges) {
        g.adjacency[cursor[a]++] = b;
        g.adjacency[cursor[b]++] = a;
    }
    if (!lexicographic) {
        for (std::uint64_t v = 0; v < n; ++v) {
            std::sort(g.adjacency.begin() + std::ptrdiff_t(g.offsets[v]),
                      g.adjacency.begin() + std::ptrdiff_t(g.offsets[v + 1]));
        }
    }
    return g;
}

inline std::vector<std::uint64_t> degree_histogram(const Graph& g) {
    std::uint64_t max_deg = 0;
    for (std::uint64_t v = 0; v < g.n; ++v) max_deg = std::max(max_deg, g.degree(v));
    std::vector<std::uint64_t> hist(max_deg + 1, 0);
    for (std::uint64_t v = 0; v < g.n; ++v) ++hist[g.degree(v)];
    return hist;
}

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(x >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("graph file: truncated");
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t(b[i]) << (8 * i);
    return x;
}

}  // namespace detail

constexpr char kGraphMagic[8] = {'C', 'O', 'R', 'E', 'B', 'P', 'G', 'R'};
constexpr std::uint64_t kGraphFormatVersion = 1;

// Layout: magic "COREBPGR", then u64 version, u64 n, u64 m, u64 offsets[n+1],
// u64 adjacency[2m]; every integer little-endian.
inline void write_graph_binary(const Graph& g, std::ostream& out) {
    out.write(kGraphMagic, 8);
    detail::put_u64(out, kGraphFormatVersion);
    detail::put_u64(out, g.n);
    detail::put_u64(out, g.m());
    for (const std::uint64_t x : g.offsets) detail::put_u64(out, x);
    for (const std::uint32_t x : g.adjacency) detail::put_u64(out, x);
    if (!out) throw std::runtime_error("graph file: write failed");
}

inline Graph read_graph_binary(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || !std::equal(magic, magic + 8, kGraphMagic)) {
        throw std::runtime_error("graph file: bad magic");
    }
    const std::uint64_t version = detail::get_u64(in);
    if (version != kGraphFormatVersion) {
        throw std::runtime_error("graph file: unsupported version");
    }
    Graph g;
    g.n = detail::get_u64(in);
    const std::uint64_t m = detail::get_u64(in);
    g.offsets.resize(g.n + 1);
    for (auto& x : g.offsets) x = detail::get_u64(in);
    g.adjacency.resize(2 * m);
    for (auto& x : g.adjacency) {
        const std::uint64_t v = detail::get_u64(in);
        if (v >= g.n) throw std::runtime_error("graph file: vertex id out of range");
        x = std::uint32_t(v);
    }
    g.validate();
    return g;
}

inline void write_graph_binary(const Graph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_graph_binary(g, out);
}

inline Graph read_graph_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_graph_binary(in);
}

// Text interchange: one "i j" pair per line, 0-based, each undirected edge
// once (written with i < j). The reader accepts either endpoint order plus
// blank and #-comment lines, and infers n as max id + 1 (or the `n` given).
inline void write_edge_list(const Graph& g, std::ostream& out) {
    for (std::uint64_t v = 0; v < g.n; ++v) {
        for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
            if (std::uint64_t(*it) > v) {
                out << v << ' ' << *it << '\n';
            }
        }
    }
    if (!out) throw std::runtime_error("edge list: write failed");
}

inline Graph read_edge_list(std::istream& in, std::uint64_t n = 0) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::uint64_t max_id = 0;
    bool any = false;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::uint64_t a = 0, b = 0;
        if (!(row >> a >> b)) {
            throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                     ": expected two vertex ids");
        }
        if (a == b) {
            throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                     ": loop not allowed");
        }
        if (a > b) std::swap(a, b);
        if (b > 0xffffffffULL) {
            throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                     ": vertex id too large");
        }
        edges.emplace_back(std::uint32_t(a), std::uint32_t(b));
        max_id = std::max(max_id, b);
        any = true;
    }
    std::uint64_t count = any ? max_id + 1 : 0;
    if (n > 0) {
        if (count > n) throw std::runtime_error("edge list: vertex id exceeds n");
        count = n;
    }
    std::sort(edges.begin(), edges.end());
    const auto last = std::unique(edges.begin(), edges.end());
    edges.erase(last, edges.end());
    return build_graph(count, edges);
}

inline Graph read_edge_list(const std::string& path, std::uint64_t n = 0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_edge_list(in, n);
}

}  // namespace corebp
