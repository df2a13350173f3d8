#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrconv/convolution.hpp"
#include "corrconv/linalg.hpp"
#include "corrconv/model.hpp"
#include "corrconv/rng.hpp"
#include "corrconv/sparse_graph.hpp"

namespace corrconv {

/// Dense square matrix for brute-force reference paths. Hard cap at n = 512
/// keeps the oracle honest about its scale.
struct DenseMatrix {
    static constexpr std::size_t kMaxDim = 512;

    std::size_t n = 0;
    std::vector<double> data; // row-major

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t dim) : n(dim), data(dim * dim, 0.0) {
        if (dim > kMaxDim) throw std::invalid_argument("DenseMatrix: dimension above oracle guard");
    }

    double& at(std::size_t i, std::size_t j) { return data[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * n + j]; }

    Vec matvec(const Vec& x) const {
        if (x.size() != n) throw std::invalid_argument("DenseMatrix::matvec: dimension mismatch");
        Vec y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += at(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

    DenseMatrix matmul(const DenseMatrix& other) const {
        if (other.n != n) throw std::invalid_argument("DenseMatrix::matmul: dimension mismatch");
        DenseMatrix out(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double a = at(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) out.at(i, j) += a * other.at(k, j);
            }
        return out;
    }

    DenseMatrix power(std::size_t k) const {
        DenseMatrix out(n);
        for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
        for (std::size_t round = 0; round < k; ++round) out = out.matmul(*this);
        return out;
    }
};

inline DenseMatrix dense_adjacency(const SparseGraph& graph) {
    DenseMatrix A(graph.n);
    for (std::size_t u = 0; u < graph.n; ++u)
        for (std::size_t e = graph.row_offsets[u]; e < graph.row_offsets[u + 1]; ++e)
            A.at(u, graph.col_indices[e]) = 1.0;
    return A;
}

/// E[A] as the full block matrix: p within a class (including the diagonal),
/// q across classes.
inline DenseMatrix dense_expected_adjacency(const ModelParams& params, const Partition& partition) {
    DenseMatrix expected(params.n);
    for (std::size_t i = 0; i < params.n; ++i)
        for (std::size_t j = 0; j < params.n; ++j)
            expected.at(i, j) = partition.labels[i] == partition.labels[j] ? params.p : params.q;
    return expected;
}

/// Densely materialized convolution operator matching ConvOperator::apply.
inline DenseMatrix dense_operator(const SparseGraph& graph, OperatorKind kind, int sign = 1) {
    if (graph.n > DenseMatrix::kMaxDim)
        throw std::invalid_argument("dense_operator: dimension above oracle guard");
    if (kind_needs_positive_degrees(kind) && graph.min_degree() == 0)
        throw std::domain_error("dense_operator: isolated vertex under a normalized kind");
    if ((kind == OperatorKind::CorrectedUnnormalized || kind == OperatorKind::VanillaAvg) &&
        graph.edge_count == 0)
        throw std::domain_error("dense_operator: empty edge set");
    const std::size_t n = graph.n;
    const double d = graph.average_degree();
    const double two_e = 2.0 * static_cast<double>(graph.edge_count);
    DenseMatrix M(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = graph.has_edge(i, j) && i != j ? 1.0 : 0.0;
            double value = 0.0;
            switch (kind) {
                case OperatorKind::CorrectedUnnormalized:
                    value = a / d - 1.0 / static_cast<double>(n);
                    break;
                case OperatorKind::CorrectedNormalized: {
                    const double di = static_cast<double>(graph.degrees[i]);
                    const double dj = static_cast<double>(graph.degrees[j]);
                    value = a / std::sqrt(di * dj) - std::sqrt(di * dj) / two_e;
                    break;
                }
                case OperatorKind::VanillaRW:
                    value = a / static_cast<double>(graph.degrees[i]);
                    break;
                case OperatorKind::VanillaSym:
                    value = a / std::sqrt(static_cast<double>(graph.degrees[i]) *
                                          static_cast<double>(graph.degrees[j]));
                    break;
                case OperatorKind::VanillaAvg:
                    value = a / d;
                    break;
            }
            M.at(i, j) = sign * value;
        }
    }
    return M;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps.
inline std::vector<double> dense_symmetric_eigenvalues(DenseMatrix M, double tol = 1e-12,
                                                       std::size_t max_sweeps = 100) {
    const std::size_t n = M.n;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += M.at(i, j) * M.at(i, j);
        if (off <= tol * tol) break;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double apq = M.at(i, j);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (M.at(j, j) - M.at(i, i)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mki = M.at(k, i);
                    const double mkj = M.at(k, j);
                    M.at(k, i) = c * mki - s * mkj;
                    M.at(k, j) = s * mki + c * mkj;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mik = M.at(i, k);
                    const double mjk = M.at(j, k);
                    M.at(i, k) = c * mik - s * mjk;
                    M.at(j, k) = s * mik + c * mjk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = M.at(i, i);
    std::sort(eig.begin(), eig.end(),
              [](double a, double b) { return std::abs(a) > std::abs(b); });
    return eig;
}

/// Dense error matrix R = A - E[A]; diagonal entries are -p for simple graphs.
inline DenseMatrix dense_error_matrix(const SparseGraph& graph, const ModelParams& params,
                                      const Partition& partition) {
    DenseMatrix R = dense_adjacency(graph);
    for (std::size_t i = 0; i < graph.n; ++i)
        for (std::size_t j = 0; j < graph.n; ++j)
            R.at(i, j) -= partition.labels[i] == partition.labels[j] ? params.p : params.q;
    return R;
}

/// e_u^T R^ell s via dense matrix powers; ell = 0 returns s(u).
inline double entrywise_error(const SparseGraph& graph, const ModelParams& params,
                              const Partition& partition, std::size_t u, std::size_t ell) {
    if (graph.n > DenseMatrix::kMaxDim)
        throw std::invalid_argument("entrywise_error: dimension above oracle guard");
    if (ell > 8) throw std::invalid_argument("entrywise_error: ell above oracle guard");
    if (u >= graph.n) throw std::invalid_argument("entrywise_error: vertex out of range");
    Vec v = signal_vector(partition);
    if (ell > 0) {
        const DenseMatrix R = dense_error_matrix(graph, params, partition);
        for (std::size_t round = 0; round < ell; ++round) v = R.matvec(v);
    }
    return v[u];
}

/// Same value by explicit enumeration of all length-ell walks from u over the
/// complete vertex set (self-loop steps included, weight R_{v,v}).
inline double entrywise_error_walksum(const SparseGraph& graph, const ModelParams& params,
                                      const Partition& partition, std::size_t u, std::size_t ell) {
    if (graph.n > 8 || ell > 4)
        throw std::invalid_argument("entrywise_error_walksum: enumeration guard");
    const DenseMatrix R = dense_error_matrix(graph, params, partition);
    const Vec s = signal_vector(partition);
    if (ell == 0) return s[u];
    const std::size_t n = graph.n;
    std::vector<std::size_t> walk(ell, 0);
    double total = 0.0;
    for (;;) {
        double weight = R.at(u, walk[0]);
        for (std::size_t j = 1; j < ell; ++j) weight *= R.at(walk[j - 1], walk[j]);
        total += weight * s[walk[ell - 1]];
        std::size_t pos = 0;
        while (pos < ell && ++walk[pos] == n) walk[pos++] = 0;
        if (pos == ell) break;
    }
    return total;
}

/// Monte-Carlo exceedance of |e_u^T R^ell s| over the theoretical envelope
/// (C sqrt(n p log n))^ell / sqrt(n), with p = max(p, q).
inline double tail_check(const ModelParams& params, const Partition& partition, std::size_t u,
                         std::size_t ell, std::size_t trials, double C,
                         std::uint64_t master_seed = 0x5EEDULL) {
    if (trials == 0) throw std::invalid_argument("tail_check: trials must be positive");
    const double n = static_cast<double>(params.n);
    const double p = std::max(params.p, params.q);
    const double threshold =
        std::pow(C * std::sqrt(n * p * std::log(n)), static_cast<double>(ell)) / std::sqrt(n);
    std::size_t exceed = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const SparseGraph graph = sample_graph(params, partition, derive_seed(master_seed, t));
        if (std::abs(entrywise_error(graph, params, partition, u, ell)) > threshold) ++exceed;
    }
    return static_cast<double>(exceed) / static_cast<double>(trials);
}

/// Exact counts of valid 2t-tuples of length-k walks from u, keyed by the
/// number of distinct undirected edges. Valid means every edge in the multiset
/// union of the walks appears at least twice. Walks range over the complete
/// vertex set including self-loop steps.
struct WalkCountTable {
    std::size_t n = 0, k = 0, t = 0, u = 0;
    std::map<std::size_t, std::uint64_t> counts;            // ell -> count
    std::map<std::size_t, long double> bounds;              // ell -> closed-form bound

    static long double bound_for(std::size_t n, std::size_t k, std::size_t t, std::size_t ell) {
        const std::size_t slots = 2 * t * k;
        if (2 * ell > slots) return 0.0L;
        long double choose = 1.0L; // C(2tk, 2*ell)
        for (std::size_t i = 0; i < 2 * ell; ++i)
            choose = choose * static_cast<long double>(slots - i) / static_cast<long double>(i + 1);
        long double double_fact = 1.0L; // (2*ell - 1)!!
        for (std::size_t v = 2 * ell > 0 ? 2 * ell - 1 : 0; v > 1; v -= 2) double_fact *= v;
        const long double spread =
            std::pow(static_cast<long double>(ell), static_cast<long double>(slots - 2 * ell));
        const long double placements =
            std::pow(static_cast<long double>(n), static_cast<long double>(ell));
        return choose * double_fact * spread * placements;
    }
};

inline WalkCountTable count_valid_walk_tuples(std::size_t n, std::size_t k, std::size_t t,
                                              std::size_t u) {
    if (n == 0 || k == 0 || t == 0) throw std::invalid_argument("count_valid_walk_tuples: n, k, t must be positive");
    if (u >= n) throw std::invalid_argument("count_valid_walk_tuples: vertex out of range");
    const std::size_t slots = 2 * t * k; // free vertex choices across the tuple
    double space = 1.0;
    for (std::size_t i = 0; i < slots; ++i) space *= static_cast<double>(n);
    if (space > 1e8) throw std::invalid_argument("count_valid_walk_tuples: enumeration above guard");

    WalkCountTable table;
    table.n = n;
    table.k = k;
    table.t = t;
    table.u = u;

    std::vector<std::size_t> vertex(slots, 0); // walk i occupies slots [i*k, (i+1)*k)
    std::vector<std::uint64_t> edges(slots);
    for (;;) {
        // edge e of walk i runs from the previous slot's vertex (u at the walk head)
        for (std::size_t i = 0; i < 2 * t; ++i) {
            std::size_t prev = u;
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t cur = vertex[i * k + j];
                const std::size_t lo = std::min(prev, cur), hi = std::max(prev, cur);
                edges[i * k + j] = static_cast<std::uint64_t>(lo) * n + hi;
                prev = cur;
            }
        }
        std::sort(edges.begin(), edges.end());
        bool valid = true;
        std::size_t distinct = 0;
        for (std::size_t i = 0; i < slots;) {
            std::size_t run = i + 1;
            while (run < slots && edges[run] == edges[i]) ++run;
            if (run - i < 2) {
                valid = false;
                break;
            }
            ++distinct;
            i = run;
        }
        if (valid) ++table.counts[distinct];

        std::size_t pos = 0;
        while (pos < slots && ++vertex[pos] == n) vertex[pos++] = 0;
        if (pos == slots) break;
    }
    for (const auto& [ell, count] : table.counts) {
        (void)count;
        table.bounds[ell] = WalkCountTable::bound_for(n, k, t, ell);
    }
    return table;
}

/// CSV audit dump: ell,count,bound.
inline void write_walk_table_csv(const WalkCountTable& table, std::ostream& out) {
    out << "ell,count,bound\n";
    for (const auto& [ell, count] : table.counts)
        out << ell << ',' << count << ',' << static_cast<double>(table.bounds.at(ell)) << '\n';
}

} // namespace corrconv
