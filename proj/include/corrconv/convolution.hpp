#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrconv/linalg.hpp"
#include "corrconv/sparse_graph.hpp"

namespace corrconv {

enum class OperatorKind {
    CorrectedUnnormalized, // A/d - 11^T/n
    CorrectedNormalized,   // D^{-1/2} A D^{-1/2} - D^{1/2} 11^T D^{1/2} / sum(d_v)
    VanillaRW,             // D^{-1} A
    VanillaSym,            // D^{-1/2} A D^{-1/2}
    VanillaAvg,            // A/d
};

inline bool kind_is_symmetric(OperatorKind kind) { return kind != OperatorKind::VanillaRW; }

inline bool kind_needs_positive_degrees(OperatorKind kind) {
    return kind == OperatorKind::CorrectedNormalized || kind == OperatorKind::VanillaRW ||
           kind == OperatorKind::VanillaSym;
}

inline const char* kind_name(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::CorrectedUnnormalized: return "corrected_unnormalized";
        case OperatorKind::CorrectedNormalized: return "corrected_normalized";
        case OperatorKind::VanillaRW: return "vanilla_rw";
        case OperatorKind::VanillaSym: return "vanilla_sym";
        case OperatorKind::VanillaAvg: return "vanilla_avg";
    }
    throw std::logic_error("kind_name: unknown kind");
}

inline OperatorKind kind_from_name(const std::string& name) {
    if (name == "corrected_unnormalized") return OperatorKind::CorrectedUnnormalized;
    if (name == "corrected_normalized") return OperatorKind::CorrectedNormalized;
    if (name == "vanilla_rw") return OperatorKind::VanillaRW;
    if (name == "vanilla_sym") return OperatorKind::VanillaSym;
    if (name == "vanilla_avg") return OperatorKind::VanillaAvg;
    throw std::invalid_argument("unknown operator kind: " + name);
}

/// Matrix-free graph convolution operator. Holds only cached degree powers;
/// apply() runs in O(|E| + n). Immutable after build, safe for concurrent use.
class ConvOperator {
public:
    ConvOperator(SparseGraph&& graph, OperatorKind kind, int sign = 1) = delete;

    // Holds a reference; the graph must outlive the operator.
    ConvOperator(const SparseGraph& graph, OperatorKind kind, int sign = 1)
        : graph_(&graph), kind_(kind), sign_(sign) {
        if (sign != 1 && sign != -1) throw std::invalid_argument("ConvOperator: sign must be +/-1");
        if (graph.n == 0) throw std::invalid_argument("ConvOperator: empty graph");
        if (kind_needs_positive_degrees(kind) && graph.min_degree() == 0)
            throw std::domain_error("ConvOperator: isolated vertex under a normalized kind");
        if ((kind == OperatorKind::CorrectedUnnormalized || kind == OperatorKind::VanillaAvg) &&
            graph.edge_count == 0)
            throw std::domain_error("ConvOperator: empty edge set, average degree is zero");
        d_ = graph.average_degree();
        two_e_ = 2.0 * static_cast<double>(graph.edge_count);
        if (kind == OperatorKind::CorrectedNormalized || kind == OperatorKind::VanillaSym) {
            inv_sqrt_deg_.resize(graph.n);
            for (std::size_t v = 0; v < graph.n; ++v)
                inv_sqrt_deg_[v] = 1.0 / std::sqrt(static_cast<double>(graph.degrees[v]));
        }
        if (kind == OperatorKind::CorrectedNormalized) {
            sqrt_deg_.resize(graph.n);
            for (std::size_t v = 0; v < graph.n; ++v)
                sqrt_deg_[v] = std::sqrt(static_cast<double>(graph.degrees[v]));
        }
    }

    const SparseGraph& graph() const { return *graph_; }
    OperatorKind kind() const { return kind_; }
    int sign() const { return sign_; }
    std::size_t dim() const { return graph_->n; }
    double average_degree() const { return d_; }

    void apply(const Vec& x, Vec& y) const {
        const SparseGraph& g = *graph_;
        if (x.size() != g.n) throw std::invalid_argument("ConvOperator::apply: dimension mismatch");
        y.assign(g.n, 0.0);
        switch (kind_) {
            case OperatorKind::CorrectedUnnormalized: {
                g.adjacency_matvec(x, y);
                const double mean = sum(x) / static_cast<double>(g.n);
                const double inv_d = 1.0 / d_;
                for (std::size_t v = 0; v < g.n; ++v) y[v] = y[v] * inv_d - mean;
                break;
            }
            case OperatorKind::CorrectedNormalized: {
                normalized_matvec(x, y);
                double proj = 0.0; // <D^{1/2} 1, x> / sum(d_v)
                for (std::size_t v = 0; v < g.n; ++v) proj += sqrt_deg_[v] * x[v];
                proj /= two_e_;
                for (std::size_t v = 0; v < g.n; ++v) y[v] -= proj * sqrt_deg_[v];
                break;
            }
            case OperatorKind::VanillaRW: {
                g.adjacency_matvec(x, y);
                for (std::size_t v = 0; v < g.n; ++v) y[v] /= static_cast<double>(g.degrees[v]);
                break;
            }
            case OperatorKind::VanillaSym: {
                normalized_matvec(x, y);
                break;
            }
            case OperatorKind::VanillaAvg: {
                g.adjacency_matvec(x, y);
                const double inv_d = 1.0 / d_;
                for (std::size_t v = 0; v < g.n; ++v) y[v] *= inv_d;
                break;
            }
        }
        if (sign_ < 0)
            for (double& v : y) v = -v;
    }

    Vec apply(const Vec& x) const {
        Vec y;
        apply(x, y);
        return y;
    }

    /// k repeated applications; k = 0 is the identity.
    Vec apply_k(const Vec& x, std::size_t k) const {
        Vec cur = x;
        Vec next;
        for (std::size_t round = 0; round < k; ++round) {
            apply(cur, next);
            cur.swap(next);
        }
        return cur;
    }

private:
    /// y = D^{-1/2} A D^{-1/2} x.
    void normalized_matvec(const Vec& x, Vec& y) const {
        const SparseGraph& g = *graph_;
        Vec scaled(g.n);
        for (std::size_t v = 0; v < g.n; ++v) scaled[v] = x[v] * inv_sqrt_deg_[v];
        g.adjacency_matvec(scaled, y);
        for (std::size_t v = 0; v < g.n; ++v) y[v] *= inv_sqrt_deg_[v];
    }

    const SparseGraph* graph_;
    OperatorKind kind_;
    int sign_;
    double d_ = 0.0;
    double two_e_ = 0.0;
    Vec inv_sqrt_deg_;
    Vec sqrt_deg_;
};

inline ConvOperator build_operator(const SparseGraph& graph, OperatorKind kind, int sign = 1) {
    return ConvOperator(graph, kind, sign);
}
ConvOperator build_operator(SparseGraph&& graph, OperatorKind kind, int sign) = delete;

/// M^k x / eta^k, the rescaled convolved vector whose entrywise distance to
/// the signal decides exact recovery. Guards the scale against under/overflow.
inline Vec rescaled_convolved(const ConvOperator& op, const Vec& x, std::size_t k, double eta) {
    if (eta <= 0.0) throw std::invalid_argument("rescaled_convolved: eta must be positive");
    const double log_scale = static_cast<double>(k) * std::log(eta);
    if (std::abs(log_scale) > 600.0)
        throw std::range_error("rescaled_convolved: eta^k out of double range");
    Vec y = op.apply_k(x, k);
    scale_inplace(y, std::exp(-log_scale));
    return y;
}

} // namespace corrconv
