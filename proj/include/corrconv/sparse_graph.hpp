#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corrconv/linalg.hpp"

namespace corrconv {

/// Undirected simple graph in compressed sparse row form, degrees cached.
/// Immutable after construction.
struct SparseGraph {
    std::size_t n = 0;
    std::vector<std::size_t> row_offsets;   // size n + 1
    std::vector<std::uint32_t> col_indices; // size 2 * edge_count
    std::vector<std::size_t> degrees;       // size n
    std::size_t edge_count = 0;

    std::size_t degree(std::size_t v) const { return degrees[v]; }

    /// Empirical average degree 2|E|/n.
    double average_degree() const {
        if (n == 0) throw std::domain_error("average_degree: empty graph");
        return 2.0 * static_cast<double>(edge_count) / static_cast<double>(n);
    }

    std::size_t min_degree() const {
        std::size_t m = n == 0 ? 0 : degrees[0];
        for (std::size_t d : degrees) m = std::min(m, d);
        return m;
    }

    bool has_edge(std::size_t u, std::size_t v) const {
        const auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[u]);
        const auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[u + 1]);
        return std::binary_search(begin, end, static_cast<std::uint32_t>(v));
    }

    /// y = A x.
    void adjacency_matvec(const Vec& x, Vec& y) const {
        if (x.size() != n) throw std::invalid_argument("adjacency_matvec: dimension mismatch");
        y.assign(n, 0.0);
        for (std::size_t u = 0; u < n; ++u) {
            double acc = 0.0;
            for (std::size_t e = row_offsets[u]; e < row_offsets[u + 1]; ++e)
                acc += x[col_indices[e]];
            y[u] = acc;
        }
    }
};

/// Builds CSR from unique undirected edges (u < v), already sorted
/// lexicographically. Neighbor lists come out sorted.
inline SparseGraph build_graph(std::size_t n,
                               const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    SparseGraph g;
    g.n = n;
    g.edge_count = edges.size();
    g.degrees.assign(n, 0);
    for (const auto& [u, v] : edges) {
        if (u >= v || v >= n) throw std::invalid_argument("build_graph: bad edge");
        ++g.degrees[u];
        ++g.degrees[v];
    }
    g.row_offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.row_offsets[i + 1] = g.row_offsets[i] + g.degrees[i];
    g.col_indices.resize(2 * edges.size());
    std::vector<std::size_t> cursor(g.row_offsets.begin(), g.row_offsets.end() - 1);
    for (const auto& [u, v] : edges) {
        g.col_indices[cursor[u]++] = v;
        g.col_indices[cursor[v]++] = u;
    }
    return g;
}

/// Edge-list text format: header "n m_edges", then one "u v" line per edge,
/// 0-indexed with u < v.
inline void write_edge_list(const SparseGraph& g, std::ostream& out) {
    out << g.n << ' ' << g.edge_count << '\n';
    for (std::size_t u = 0; u < g.n; ++u)
        for (std::size_t e = g.row_offsets[u]; e < g.row_offsets[u + 1]; ++e)
            if (u < g.col_indices[e]) out << u << ' ' << g.col_indices[e] << '\n';
}

inline SparseGraph read_edge_list(std::istream& in) {
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw std::runtime_error("read_edge_list: bad header");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t u = 0, v = 0;
        if (!(in >> u >> v)) throw std::runtime_error("read_edge_list: truncated edge list");
        if (u >= v || v >= n) throw std::runtime_error("read_edge_list: invalid edge");
        edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    }
    std::sort(edges.begin(), edges.end());
    return build_graph(n, edges);
}

} // namespace corrconv
