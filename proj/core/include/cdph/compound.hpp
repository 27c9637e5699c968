#pragma once

#include <functional>
#include <utility>

#include "cdph/cdph.hpp"
#include "cdph/closures.hpp"
#include "cdph/matrix.hpp"
#include "cdph/rng.hpp"

namespace cdph {

/// Bivariate MPH* parameters: a terminating continuous-time chain (pi, S)
/// over C with a 2 x |C| non-negative reward matrix; coordinate k
/// accumulates rewards[k] along the trajectory until absorption.
struct MphStarParams {
    Vec pi;
    Matrix subintensity;
    Matrix rewards; ///< 2 x |C|

    /// Validates: pi a probability vector; S with negative diagonal,
    /// non-negative off-diagonal, non-positive row sums and almost-sure
    /// absorption (termination of the uniformized chain); rewards >= 0.
    MphStarParams(Vec pi_in, Matrix subintensity_in, Matrix rewards_in);

    std::size_t dim() const { return pi.size(); }
    /// Exit rate vector -S 1.
    Vec exit_rates() const;
};

struct LaplacePoint {
    double theta1 = 0.0;
    double theta2 = 0.0;
};

/// Scalar Laplace transform theta -> E[e^{-theta X}] of a positive summand.
using LaplaceTransform = std::function<double(double)>;

/// E[exp(-theta1 Y1 - theta2 Y2)] for Y_k = sum_{l=1}^{tau_k} X_{k,l} with
/// independent summand coordinates: the joint pgf of (tau1, tau2) at
/// (lt1(theta1), lt2(theta2)). The transforms must return values in (0, 1]
/// for theta >= 0; negative theta (needed by numeric differentiation) is
/// allowed and guarded by the resolvent convergence check.
double compound_laplace(const CdphParams& params, const LaplaceTransform& lt1,
                        const LaplaceTransform& lt2, LaplacePoint point);

/// E[e^{-theta1 X1 - theta2 X2}] = pi (Delta - S)^{-1} (-S 1) with
/// Delta = diag(theta1 r1j + theta2 r2j).
double mphstar_laplace(const MphStarParams& params, LaplacePoint point);

/// MPH* representation of (Y1, Y2) when the summand pairs are themselves
/// MPH*: product chain on (coupled-chain states) x C with subintensity
/// I (x) S + Pmax (x) (-S 1 pi); rewards stop per coordinate once that
/// coordinate's count has terminated.
MphStarParams build_compound_mphstar(const CdphParams& counts, const MphStarParams& summand);

struct NumericMoment {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// E[Y1^{r1} Y2^{r2}] for r1, r2 <= 2 by Richardson-extrapolated central
/// differences of the Laplace transform (step h, one extrapolation level).
/// Throws NumericError when the two difference levels disagree wildly.
NumericMoment compound_cross_moment_numeric(const CdphParams& params, const LaplaceTransform& lt1,
                                            const LaplaceTransform& lt2, int r1, int r2,
                                            double step = 1e-4);

/// Same numeric moments for a directly parameterized MPH* pair.
NumericMoment mphstar_cross_moment_numeric(const MphStarParams& params, int r1, int r2,
                                           double step = 1e-4);

/// One exact draw of an MPH* pair via uniformization of the jump chain.
std::pair<double, double> mphstar_sample(const MphStarParams& params, Rng& rng);

/// Draws one i.i.d. summand pair (X1, X2).
using SummandSampler = std::function<std::pair<double, double>(Rng&)>;

/// One draw of (Y1, Y2): counts from the CDPH law, one shared i.i.d.
/// sequence of summand pairs, coordinate k summing its first tau_k entries.
std::pair<double, double> compound_sample(const CdphParams& params, const SummandSampler& sampler,
                                          Rng& rng);

} // namespace cdph
