#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "corrconv/linalg.hpp"
#include "corrconv/model.hpp"

namespace corrconv {

struct ClassificationResult {
    Partition predicted;
    std::size_t misclassified = 0; // after the better global sign flip
    double error_rate = 0.0;
    bool exact = false;
};

/// Threshold at zero: positive entries go to S (+1), the rest to T (-1).
/// Zero entries land on the -1 side; the sign-flip minimum in score() keeps
/// them from ever being scored as lucky ties.
inline Partition classify(const Vec& x) {
    Partition pred;
    pred.labels.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pred.labels[i] = x[i] > 0.0 ? 1 : -1;
    return pred;
}

/// Hamming distance minimized over the global sign flip; s and -s encode the
/// same partition.
inline ClassificationResult score(const Partition& pred, const Partition& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("score: dimension mismatch");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred.labels[i] != truth.labels[i]) ++mismatches;
    ClassificationResult result;
    result.predicted = pred;
    result.misclassified = std::min(mismatches, pred.size() - mismatches);
    result.error_rate =
        pred.size() == 0 ? 0.0 : static_cast<double>(result.misclassified) / static_cast<double>(pred.size());
    result.exact = result.misclassified == 0;
    return result;
}

/// n * min_c ||c*x - s||^2 with the optimal scalar c = <x,s>/||x||^2.
/// Upper-bounds the sign-flip misclassification count: every wrongly signed
/// entry contributes at least 1/n to the squared distance.
inline double mse_error_bound(const Vec& x, const Vec& s) {
    if (x.size() != s.size()) throw std::invalid_argument("mse_error_bound: dimension mismatch");
    const double x_sq = dot(x, x);
    const double s_sq = dot(s, s);
    if (x_sq == 0.0) return static_cast<double>(x.size()) * s_sq;
    const double xs = dot(x, s);
    const double residual = s_sq - xs * xs / x_sq;
    return static_cast<double>(x.size()) * std::max(residual, 0.0);
}

/// ||x - s||_inf; exact recovery is guaranteed when this is below 1/sqrt(n).
inline double infinity_error(const Vec& x_rescaled, const Vec& s) {
    if (x_rescaled.size() != s.size()) throw std::invalid_argument("infinity_error: dimension mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        worst = std::max(worst, std::abs(x_rescaled[i] - s[i]));
    return worst;
}

} // namespace corrconv
