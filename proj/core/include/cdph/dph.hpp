#pragma once

#include <cstddef>

#include "cdph/matrix.hpp"
#include "cdph/rng.hpp"

namespace cdph {

/// Univariate discrete phase-type distribution: the absorption step of a
/// terminating Markov chain with initial row vector alpha and sub-stochastic
/// transition matrix P. Support is {1, 2, ...}.
struct DphParams {
    Vec alpha;
    Matrix transition;

    /// Validates on construction: alpha non-negative and summing to 1 within
    /// 1e-9 (an initial mass deficit, i.e. a point mass of tau = 0, is only
    /// accepted when explicitly requested), and P sub-stochastic with the
    /// termination check.
    DphParams(Vec alpha_in, Matrix transition_in, bool allow_mass_deficit = false);

    std::size_t dim() const { return alpha.size(); }
    /// One-step absorption probabilities 1 - P 1.
    Vec exit_vector() const;
    double mass_deficit() const { return mass_deficit_; }

private:
    double mass_deficit_ = 0.0;
};

/// P(tau = ell) = alpha P^{ell-1} (1 - P 1), for ell >= 1.
double dph_pmf(const DphParams& params, long ell);

/// P(tau <= ell) = 1 - alpha P^ell 1 (plus any configured point mass at 0).
double dph_cdf(const DphParams& params, long ell);

/// P(tau > ell) = alpha P^ell 1.
double dph_tail(const DphParams& params, long ell);

/// E[x^tau] = x alpha (I - xP)^{-1} (1 - P 1). Valid whenever the spectral
/// radius of xP is below 1 (checked; fails with NumericError otherwise).
double dph_pgf(const DphParams& params, double x);

/// E[tau (tau-1) ... (tau-n+1)] = n! alpha P^{n-1} (I-P)^{-n-1} (1 - P 1).
double dph_factorial_moment(const DphParams& params, int order);

double dph_mean(const DphParams& params);

/// Simulates the augmented chain (cemetery state last) to absorption with
/// inverse-cdf row sampling. Returns the absorption step, or 0 for a draw
/// falling into a configured initial mass deficit.
long dph_sample(const DphParams& params, Rng& rng);

/// Smallest L with analytic tail alpha P^L 1 < tail_tol.
long dph_support_bound(const DphParams& params, double tail_tol);

} // namespace cdph
