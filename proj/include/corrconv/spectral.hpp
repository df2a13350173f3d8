#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corrconv/convolution.hpp"
#include "corrconv/linalg.hpp"
#include "corrconv/model.hpp"
#include "corrconv/rng.hpp"
#include "corrconv/sparse_graph.hpp"

namespace corrconv {

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what + " (last residual " + std::to_string(last_residual) + ")"),
          residual(last_residual) {}
    double residual;
};

struct PowerIterationOptions {
    double tol = 1e-8;          // relative residual ||Mv - lambda v|| <= tol * |lambda|
    std::size_t max_iter = 10000; // budget in operator applications
    std::uint64_t seed = 0x5EEDULL;
};

struct EigenPair {
    double value = 0.0;
    Vec vector;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool degenerate = false; // operator indistinguishable from zero
};

namespace detail {

constexpr double kZeroOperatorTol = 1e-13;

/// Tries to pull a signed eigenvector out of an (approximately) converged
/// iterate of M^2. For a +/-lambda pair the iterate is a mixture; adding
/// +/-modulus * v to Mv projects onto one sign's eigenspace.
template <typename MatVec>
bool extract_signed_eigenpair(MatVec&& matvec, const Vec& v, const Vec& mv, double modulus,
                              double tol, EigenPair& out) {
    for (int sign : {+1, -1}) {
        Vec z = mv;
        axpy(z, sign * modulus, v);
        const double zn = norm2(z);
        if (zn <= 1e-10 * std::max(modulus, 1.0)) continue;
        scale_inplace(z, 1.0 / zn);
        Vec mz;
        matvec(z, mz);
        const double lambda = dot(z, mz);
        Vec resid = mz;
        axpy(resid, -lambda, z);
        const double r = norm2(resid);
        if (r <= tol * std::max(std::abs(lambda), 1e-300)) {
            out.value = lambda;
            out.vector = std::move(z);
            out.residual = r;
            return true;
        }
    }
    return false;
}

} // namespace detail

/// Dominant-modulus eigenpair of a symmetric black-box operator.
/// Plain power iteration with a Rayleigh-quotient residual test; when the
/// residual stagnates (a +/-lambda pair makes the iterates oscillate), falls
/// back to iterating on M^2 and recovers the sign afterwards.
template <typename MatVec>
EigenPair power_iteration(MatVec&& matvec, std::size_t n, PowerIterationOptions opts = {}) {
    if (n == 0) throw std::invalid_argument("power_iteration: empty operator");
    if (opts.tol <= 0.0) throw std::invalid_argument("power_iteration: tol must be positive");
    Vec v = random_unit_vector(n, opts.seed);
    Vec w;
    std::size_t used = 0;
    double last_residual = 0.0;

    matvec(v, w);
    ++used;
    if (norm2(w) <= detail::kZeroOperatorTol) {
        EigenPair out;
        out.vector = std::move(v);
        out.iterations = used;
        out.degenerate = true;
        return out;
    }

    const std::size_t window = 64;
    double window_best = std::numeric_limits<double>::infinity();
    double prev_window_best = std::numeric_limits<double>::infinity();
    bool squared_mode = false;

    while (used < opts.max_iter && !squared_mode) {
        const double lambda = dot(v, w);
        Vec resid = w;
        axpy(resid, -lambda, v);
        last_residual = norm2(resid);
        if (last_residual <= opts.tol * std::max(std::abs(lambda), 1e-300)) {
            EigenPair out;
            out.value = lambda;
            out.vector = std::move(v);
            out.iterations = used;
            out.residual = last_residual;
            return out;
        }
        window_best = std::min(window_best, last_residual);
        if (used % window == 0) {
            if (used >= 2 * window && window_best > 0.5 * prev_window_best) {
                squared_mode = true; // oscillation or near-degenerate +/- pair
                break;
            }
            prev_window_best = window_best;
            window_best = std::numeric_limits<double>::infinity();
        }
        const double wn = norm2(w);
        if (wn <= detail::kZeroOperatorTol) {
            EigenPair out;
            out.vector = std::move(v);
            out.iterations = used;
            out.degenerate = true;
            return out;
        }
        v = w;
        scale_inplace(v, 1.0 / wn);
        matvec(v, w);
        ++used;
    }

    // M^2 iteration: converges on the dominant-modulus eigenspace regardless
    // of sign structure; the Rayleigh quotient of M^2 is monotone.
    double prev_mu = -1.0;
    std::size_t stable = 0;
    while (used + 2 <= opts.max_iter) {
        matvec(v, w);
        Vec u;
        matvec(w, u);
        used += 2;
        const double mu = dot(v, u); // = ||Mv||^2
        const double modulus = std::sqrt(std::max(mu, 0.0));
        if (modulus <= detail::kZeroOperatorTol) {
            EigenPair out;
            out.vector = std::move(v);
            out.iterations = used;
            out.degenerate = true;
            return out;
        }
        if (prev_mu >= 0.0 && std::abs(mu - prev_mu) <= 0.25 * opts.tol * mu)
            ++stable;
        else
            stable = 0;
        prev_mu = mu;
        if (stable >= 2) {
            EigenPair out;
            out.iterations = used;
            if (detail::extract_signed_eigenpair(matvec, v, w, modulus, opts.tol, out)) {
                out.iterations = used + 2;
                return out;
            }
            stable = 0;
        }
        const double un = norm2(u);
        if (un <= detail::kZeroOperatorTol * modulus) break;
        v = u;
        scale_inplace(v, 1.0 / un);
    }
    throw ConvergenceError("power_iteration: no convergence within max_iter", last_residual);
}

/// Dominant eigenpair of M - lambda1 * v1 v1^T, re-orthogonalized against v1.
template <typename MatVec>
EigenPair second_eigenpair(MatVec&& matvec, std::size_t n, const EigenPair& first,
                           PowerIterationOptions opts = {}) {
    if (first.vector.size() != n) throw std::invalid_argument("second_eigenpair: bad first pair");
    auto deflated = [&](const Vec& x, Vec& y) {
        matvec(x, y);
        axpy(y, -first.value * dot(first.vector, x), first.vector);
    };
    EigenPair pair = power_iteration(deflated, n, opts);
    if (!pair.degenerate) {
        axpy(pair.vector, -dot(first.vector, pair.vector), first.vector);
        const double nn = norm2(pair.vector);
        if (nn > 0.0) scale_inplace(pair.vector, 1.0 / nn);
    }
    return pair;
}

struct NormEstimate {
    double value = 0.0;
    Vec vector; // final M^2 iterate
    std::size_t iterations = 0;
    bool degenerate = false;
};

struct NormEstimateOptions {
    double tol = 1e-6; // relative change of the estimate, three stable checks
    std::size_t max_iter = 10000;
    std::uint64_t seed = 0x5EEDULL;
};

/// Spectral-norm estimate of a symmetric operator by power iteration on M^2;
/// the estimate ||Mv|| is monotone non-decreasing along the iterates and
/// slightly biased low at finite tolerance.
template <typename MatVec>
NormEstimate spectral_norm_estimate(MatVec&& matvec, std::size_t n, NormEstimateOptions opts = {}) {
    if (n == 0) throw std::invalid_argument("spectral_norm_estimate: empty operator");
    Vec v = random_unit_vector(n, opts.seed);
    Vec w, u;
    double prev = -1.0;
    std::size_t stable = 0;
    NormEstimate out;
    for (std::size_t it = 0; 2 * it < opts.max_iter; ++it) {
        matvec(v, w);
        const double est = norm2(w);
        if (est <= detail::kZeroOperatorTol) {
            out.vector = std::move(v);
            out.iterations = 2 * it + 1;
            out.degenerate = true;
            return out;
        }
        if (prev >= 0.0 && std::abs(est - prev) <= opts.tol * est)
            ++stable;
        else
            stable = 0;
        if (stable >= 3) {
            out.value = est;
            out.vector = std::move(v);
            out.iterations = 2 * it + 1;
            return out;
        }
        prev = est;
        matvec(w, u);
        const double un = norm2(u);
        if (un == 0.0) {
            out.vector = std::move(v);
            out.iterations = 2 * it + 2;
            out.degenerate = true;
            return out;
        }
        v = u;
        scale_inplace(v, 1.0 / un);
    }
    throw ConvergenceError("spectral_norm_estimate: no convergence within max_iter",
                           prev < 0.0 ? 0.0 : prev);
}

/// Signed top eigenvalue estimate built on spectral_norm_estimate. For gapped
/// operators the vector is the true dominant eigenvector; for +/- degenerate
/// spectra the modulus is reliable and the sign follows the Rayleigh quotient.
template <typename MatVec>
EigenPair top_eigen_estimate(MatVec&& matvec, std::size_t n, NormEstimateOptions opts = {}) {
    NormEstimate est = spectral_norm_estimate(matvec, n, opts);
    EigenPair out;
    out.iterations = est.iterations;
    if (est.degenerate) {
        out.vector = std::move(est.vector);
        out.degenerate = true;
        return out;
    }
    Vec mv;
    matvec(est.vector, mv);
    const double ray = dot(est.vector, mv);
    const int sign = ray >= 0.0 ? 1 : -1;
    Vec z = mv;
    axpy(z, sign * est.value, est.vector);
    const double zn = norm2(z);
    if (zn > 1e-9 * est.value) {
        scale_inplace(z, 1.0 / zn);
        Vec mz;
        matvec(z, mz);
        out.value = dot(z, mz);
        Vec resid = mz;
        axpy(resid, -out.value, z);
        out.residual = norm2(resid);
        out.vector = std::move(z);
    } else {
        out.value = sign * est.value;
        out.vector = std::move(est.vector);
    }
    return out;
}

struct DegreeStats {
    double d = 0.0;       // empirical average degree 2|E|/n
    double eta = 0.0;     // (p-q) n / (2 d)
    double d_prime = 0.0; // ((p+q) n / 2 - d) / (n d)
};

inline DegreeStats degree_stats(const SparseGraph& graph, const ModelParams& params) {
    if (graph.edge_count == 0) throw std::domain_error("degree_stats: empty graph");
    DegreeStats stats;
    stats.d = graph.average_degree();
    const double n = static_cast<double>(graph.n);
    stats.eta = (params.p - params.q) * n / (2.0 * stats.d);
    stats.d_prime = (0.5 * (params.p + params.q) * n - stats.d) / (n * stats.d);
    return stats;
}

/// ||A - E[A]||, evaluated matrix-free: R x = A x - E[A] x.
inline double error_matrix_norm(const SparseGraph& graph, const ModelParams& params, const Vec& s,
                                NormEstimateOptions opts = {}) {
    Vec ax;
    auto matvec = [&](const Vec& x, Vec& y) {
        graph.adjacency_matvec(x, ax);
        y = expected_adjacency_matvec(params, s, x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = ax[i] - y[i];
    };
    return spectral_norm_estimate(matvec, graph.n, opts).value;
}

/// ||M - gamma s s^T|| for a symmetric black-box operator M.
template <typename MatVec>
double deviation_norm(MatVec&& matvec, std::size_t n, double gamma, const Vec& s,
                      NormEstimateOptions opts = {}) {
    auto dev = [&](const Vec& x, Vec& y) {
        matvec(x, y);
        axpy(y, -gamma * dot(s, x), s);
    };
    return spectral_norm_estimate(dev, n, opts).value;
}

inline double deviation_norm(const ConvOperator& op, double gamma, const Vec& s,
                             NormEstimateOptions opts = {}) {
    if (!kind_is_symmetric(op.kind()))
        throw std::invalid_argument("deviation_norm: operator kind is not symmetric");
    auto matvec = [&](const Vec& x, Vec& y) { op.apply(x, y); };
    return deviation_norm(matvec, op.dim(), gamma, s, opts);
}

/// <s, v>^2 for a unit vector v.
inline double eigenvector_correlation(const Vec& s, const Vec& v) {
    if (s.size() != v.size()) throw std::invalid_argument("eigenvector_correlation: dimension mismatch");
    const double nv = norm2(v);
    if (std::abs(nv - 1.0) > 1e-8)
        throw std::invalid_argument("eigenvector_correlation: v is not a unit vector");
    const double c = dot(s, v);
    return c * c;
}

/// Everything the concentration theory bounds, measured on one sampled graph
/// for one operator kind.
struct SpectralReport {
    OperatorKind kind = OperatorKind::CorrectedUnnormalized;
    double d = 0.0;
    double eta = 0.0;
    double d_prime = 0.0;
    double gamma = 0.0;      // (p-q)/(p+q), sign as defined
    double r_norm = 0.0;     // ||A - E[A]||
    double delta = 0.0;      // ||M - |gamma| s s^T|| for the signed operator
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double s_hat_corr = 0.0; // <s, top eigenvector>^2

    static std::string csv_header() {
        return "kind,d,eta,d_prime,gamma,r_norm,delta,lambda1,lambda2,s_hat_corr";
    }
};

struct SpectralOptions {
    double tol = 1e-6;
    std::size_t max_iter = 20000;
    std::uint64_t seed = 0x5EEDULL;
};

/// Measures a SpectralReport for one (graph, kind). For q > p the operator is
/// built with sign -1 so the signal eigenvalue stays positive and all bounds
/// read against |gamma|.
inline SpectralReport measure_spectral(const SparseGraph& graph, const ModelParams& params,
                                       const Partition& partition, OperatorKind kind,
                                       SpectralOptions opts = {}) {
    if (!kind_is_symmetric(kind))
        throw std::invalid_argument("measure_spectral: operator kind is not symmetric");
    SpectralReport report;
    report.kind = kind;
    const DegreeStats stats = degree_stats(graph, params);
    report.d = stats.d;
    report.eta = stats.eta;
    report.d_prime = stats.d_prime;
    report.gamma = params.p + params.q > 0.0 ? params.gamma() : 0.0;
    const Vec s = signal_vector(partition);
    const int sign = params.q > params.p ? -1 : 1;
    const ConvOperator op(graph, kind, sign);
    auto matvec = [&](const Vec& x, Vec& y) { op.apply(x, y); };

    NormEstimateOptions norm_opts{opts.tol, opts.max_iter, derive_seed(opts.seed, 1)};
    report.r_norm = error_matrix_norm(graph, params, s, norm_opts);
    norm_opts.seed = derive_seed(opts.seed, 2);
    report.delta = deviation_norm(op, std::abs(report.gamma), s, norm_opts);
    norm_opts.seed = derive_seed(opts.seed, 3);
    EigenPair top = top_eigen_estimate(matvec, graph.n, norm_opts);
    report.lambda1 = top.value;
    report.s_hat_corr = top.degenerate ? 0.0 : eigenvector_correlation(s, top.vector);
    norm_opts.seed = derive_seed(opts.seed, 4);
    auto deflated = [&](const Vec& x, Vec& y) {
        op.apply(x, y);
        axpy(y, -top.value * dot(top.vector, x), top.vector);
    };
    EigenPair second = top_eigen_estimate(deflated, graph.n, norm_opts);
    report.lambda2 = second.value;
    return report;
}

inline void write_csv_row(const SpectralReport& r, std::ostream& out) {
    out.precision(17);
    out << kind_name(r.kind) << ',' << r.d << ',' << r.eta << ',' << r.d_prime << ',' << r.gamma
        << ',' << r.r_norm << ',' << r.delta << ',' << r.lambda1 << ',' << r.lambda2 << ','
        << r.s_hat_corr;
}

} // namespace corrconv
