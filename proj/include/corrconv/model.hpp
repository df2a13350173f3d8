#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrconv/linalg.hpp"
#include "corrconv/rng.hpp"
#include "corrconv/sparse_graph.hpp"

namespace corrconv {

/// Two-block model: n vertices split evenly into classes S (+1) and T (-1),
/// intra-class edge probability p, inter-class q, and m-dimensional Gaussian
/// features with class means mu/nu and noise standard deviation sigma.
struct ModelParams {
    std::size_t n = 0;
    std::size_t m = 1;
    double p = 0.0;
    double q = 0.0;
    std::vector<double> mu;
    std::vector<double> nu;
    double sigma = 0.0;

    void validate() const {
        if (n < 2 || n % 2 != 0) throw std::invalid_argument("ModelParams: n must be even and >= 2");
        if (m == 0) throw std::invalid_argument("ModelParams: m must be positive");
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("ModelParams: p out of [0,1]");
        if (q < 0.0 || q > 1.0) throw std::invalid_argument("ModelParams: q out of [0,1]");
        if (sigma < 0.0) throw std::invalid_argument("ModelParams: sigma must be non-negative");
        if (!mu.empty() && mu.size() != m) throw std::invalid_argument("ModelParams: mu has wrong dimension");
        if (!nu.empty() && nu.size() != m) throw std::invalid_argument("ModelParams: nu has wrong dimension");
    }

    /// Relative signal strength (p-q)/(p+q); requires p+q > 0.
    double gamma() const {
        if (p + q <= 0.0) throw std::domain_error("gamma: p+q must be positive");
        return (p - q) / (p + q);
    }
};

/// +/-1 class labels; +1 means S, -1 means T. Always balanced.
struct Partition {
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }

    void validate() const {
        std::ptrdiff_t balance = 0;
        for (int v : labels) {
            if (v != 1 && v != -1) throw std::invalid_argument("Partition: labels must be +/-1");
            balance += v;
        }
        if (balance != 0) throw std::invalid_argument("Partition: classes must be balanced");
    }
};

/// Row i holds the feature vector of vertex i.
struct FeatureMatrix {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> data; // row-major, n * m

    double* row(std::size_t i) { return data.data() + i * m; }
    const double* row(std::size_t i) const { return data.data() + i * m; }
};

/// Result of collapsing m-dimensional features to the centered 1-D model:
/// x = s + g with g i.i.d. N(0, sigma_prime^2).
struct OneDimFeatures {
    Vec x;
    double sigma_prime = 0.0;
};

/// Balanced labels, first n/2 vertices in S unless shuffled.
inline Partition sample_partition(std::size_t n, bool shuffle = false, std::uint64_t seed = 0) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("sample_partition: n must be even and >= 2");
    Partition part;
    part.labels.assign(n, -1);
    for (std::size_t i = 0; i < n / 2; ++i) part.labels[i] = 1;
    if (shuffle) {
        Xoshiro256pp rng(seed);
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = rng.below(i + 1);
            std::swap(part.labels[i], part.labels[j]);
        }
    }
    return part;
}

/// Each unordered pair {i,j} gets an edge independently: probability p within
/// a class, q across. Simple graph, no self-loops.
inline SparseGraph sample_graph(const ModelParams& params, const Partition& partition,
                                std::uint64_t seed) {
    params.validate();
    partition.validate();
    if (partition.size() != params.n)
        throw std::invalid_argument("sample_graph: partition size mismatch");
    Xoshiro256pp rng(seed);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    const double expected = 0.5 * static_cast<double>(params.n) * static_cast<double>(params.n) *
                            0.5 * (params.p + params.q);
    edges.reserve(static_cast<std::size_t>(1.1 * expected) + 64);
    for (std::size_t i = 0; i + 1 < params.n; ++i) {
        for (std::size_t j = i + 1; j < params.n; ++j) {
            const double prob = partition.labels[i] == partition.labels[j] ? params.p : params.q;
            if (rng.uniform() < prob)
                edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    }
    return build_graph(params.n, edges);
}

/// Row i = mu + g_i for i in S, nu + g_i for i in T, g_i ~ N(0, sigma^2 I_m).
inline FeatureMatrix sample_features(const ModelParams& params, const Partition& partition,
                                     std::uint64_t seed) {
    params.validate();
    partition.validate();
    if (partition.size() != params.n)
        throw std::invalid_argument("sample_features: partition size mismatch");
    if (params.mu.size() != params.m || params.nu.size() != params.m)
        throw std::invalid_argument("sample_features: mu/nu must have dimension m");
    Xoshiro256pp rng(seed);
    FeatureMatrix X;
    X.n = params.n;
    X.m = params.m;
    X.data.resize(params.n * params.m);
    for (std::size_t i = 0; i < params.n; ++i) {
        const std::vector<double>& mean = partition.labels[i] == 1 ? params.mu : params.nu;
        double* row = X.row(i);
        for (std::size_t c = 0; c < params.m; ++c)
            row[c] = mean[c] + params.sigma * rng.gaussian();
    }
    return X;
}

/// Unit-norm signal: +1/sqrt(n) on S, -1/sqrt(n) on T.
inline Vec signal_vector(const Partition& partition) {
    partition.validate();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(partition.size()));
    Vec s(partition.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = partition.labels[i] * inv_sqrt_n;
    return s;
}

/// Projects features onto w = mu - nu, recenters, and rescales so the
/// noiseless signal is exactly +/-1/sqrt(n). The per-entry noise becomes
/// N(0, sigma_prime^2) with sigma_prime = 2*sigma/(sqrt(n)*||mu-nu||).
inline OneDimFeatures reduce_to_1d(const FeatureMatrix& X, const std::vector<double>& mu,
                                   const std::vector<double>& nu, double sigma) {
    if (mu.size() != X.m || nu.size() != X.m)
        throw std::invalid_argument("reduce_to_1d: mean dimension mismatch");
    if (sigma < 0.0) throw std::invalid_argument("reduce_to_1d: sigma must be non-negative");
    std::vector<double> w(X.m);
    double w_norm_sq = 0.0;
    for (std::size_t c = 0; c < X.m; ++c) {
        w[c] = mu[c] - nu[c];
        w_norm_sq += w[c] * w[c];
    }
    if (w_norm_sq <= 0.0) throw std::domain_error("reduce_to_1d: degenerate means (mu == nu)");
    double bias = 0.0; // -<mu+nu, mu-nu>/2, identical for every vertex
    for (std::size_t c = 0; c < X.m; ++c) bias -= 0.5 * (mu[c] + nu[c]) * w[c];
    const double root_n = std::sqrt(static_cast<double>(X.n));
    const double scale = 2.0 / (root_n * w_norm_sq);

    OneDimFeatures out;
    out.x.resize(X.n);
    for (std::size_t i = 0; i < X.n; ++i) {
        const double* row = X.row(i);
        double proj = bias;
        for (std::size_t c = 0; c < X.m; ++c) proj += row[c] * w[c];
        out.x[i] = scale * proj;
    }
    out.sigma_prime = 2.0 * sigma / (root_n * std::sqrt(w_norm_sq));
    return out;
}

inline OneDimFeatures reduce_to_1d(const FeatureMatrix& X, const ModelParams& params) {
    return reduce_to_1d(X, params.mu, params.nu, params.sigma);
}

/// y = E[A] x evaluated through the rank-2 form
/// E[A] = (p+q)/2 * 11^T + (p-q)n/2 * ss^T. The diagonal of E[A] is p
/// (full blocks), so A - E[A] has diagonal -p for simple sampled graphs.
inline Vec expected_adjacency_matvec(const ModelParams& params, const Vec& s, const Vec& x) {
    if (s.size() != params.n || x.size() != params.n)
        throw std::invalid_argument("expected_adjacency_matvec: dimension mismatch");
    const double ones_coeff = 0.5 * (params.p + params.q) * sum(x);
    const double signal_coeff = 0.5 * (params.p - params.q) * static_cast<double>(params.n) * dot(s, x);
    Vec y(params.n);
    for (std::size_t i = 0; i < params.n; ++i) y[i] = ones_coeff + signal_coeff * s[i];
    return y;
}

/// Feature CSV: one row per vertex, comma-separated coordinates.
inline void write_features_csv(const FeatureMatrix& X, std::ostream& out) {
    out.precision(17);
    for (std::size_t i = 0; i < X.n; ++i) {
        const double* row = X.row(i);
        for (std::size_t c = 0; c < X.m; ++c) {
            if (c) out << ',';
            out << row[c];
        }
        out << '\n';
    }
}

inline FeatureMatrix read_features_csv(std::istream& in) {
    FeatureMatrix X;
    std::string line;
    std::vector<double> values;
    std::size_t m = 0, n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
            ++cols;
        }
        if (m == 0)
            m = cols;
        else if (cols != m)
            throw std::runtime_error("read_features_csv: ragged row " + std::to_string(n));
        ++n;
    }
    if (n == 0 || m == 0) throw std::runtime_error("read_features_csv: empty input");
    X.n = n;
    X.m = m;
    X.data = std::move(values);
    return X;
}

} // namespace corrconv
