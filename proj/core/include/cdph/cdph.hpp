#pragma once

#include <cstddef>
#include <vector>

#include "cdph/dph.hpp"
#include "cdph/matrix.hpp"
#include "cdph/rng.hpp"

namespace cdph {

/// Lattice placement of a bivariate count pair: the model-level pair
/// (tau1, tau2) lives on {2,3,...}^2 and the data-level pair is
/// x_k = c_k (tau_k - 2) + k_k. The default (1,2,1,2) makes data and
/// model scales coincide.
struct Shift {
    double c1 = 1.0, k1 = 2.0;
    double c2 = 1.0, k2 = 2.0;

    double to_data1(long tau) const { return c1 * static_cast<double>(tau - 2) + k1; }
    double to_data2(long tau) const { return c2 * static_cast<double>(tau - 2) + k2; }

    /// Back-transform (x - k)/c + 2; throws DataError off the lattice
    /// (non-integer beyond 1e-9, or tau < 2).
    long to_tau1(double x) const;
    long to_tau2(double x) const;

    bool on_lattice1(double x) const;
    bool on_lattice2(double x) const;

    bool operator==(const Shift& other) const = default;
};

/// Latent decomposition of a draw: m = tau12 (shared phase length),
/// z1 = tau1 - tau12, z2 = tau2 - tau12, all >= 1.
struct LatentTriple {
    long m = 0;
    long z1 = 0;
    long z2 = 0;
};

/// Bivariate common-shock discrete phase-type parameters. Two chains share
/// one trajectory through E (driven by P) until the first exit into S
/// (via U), then run independently through S under Q1 and Q2 until
/// absorption. (tau1, tau2) are the two absorption steps.
struct CdphParams {
    Vec alpha;  ///< initial row vector over E
    Matrix P;   ///< E x E shared-phase transitions
    Matrix U;   ///< E x S exit transitions into the independent phase
    Matrix Q1;  ///< S x S coordinate-1 transitions
    Matrix Q2;  ///< S x S coordinate-2 transitions
    Shift shift;

    /// Validates: alpha sums to 1 within 1e-9; every row of (P U) sums to 1
    /// within 1e-9; Q1, Q2 sub-stochastic and terminating; P terminating.
    CdphParams(Vec alpha_in, Matrix p, Matrix u, Matrix q1, Matrix q2, Shift shift_in = {});

    std::size_t dim_e() const { return alpha.size(); }
    std::size_t dim_s() const { return Q1.rows(); }

    /// Exit vectors q_k = 1 - Q_k 1 (entries < 0 beyond -1e-12 rejected at
    /// construction, tiny negatives clamped to 0).
    const Vec& exit1() const { return exit1_; }
    const Vec& exit2() const { return exit2_; }

private:
    Vec exit1_, exit2_;
};

/// P(tau12 = m, tau1 - tau12 = z1, tau2 - tau12 = z2)
///   = alpha P^{m-1} U ((Q1^{z1-1} q1) o (Q2^{z2-1} q2)).
double psi(const CdphParams& params, long m, long z1, long z2);

/// Same with the initial mass concentrated at E-state `state`.
double psi_conditional(const CdphParams& params, std::size_t state, long m, long z1, long z2);

/// P(tau1 = n1, tau2 = n2) = sum_{m=1}^{min(n1,n2)-1} psi(m, n1-m, n2-m).
/// Arguments outside the support {2,3,...}^2 return 0.
double joint_pmf(const CdphParams& params, long n1, long n2);

double joint_pmf_conditional(const CdphParams& params, std::size_t state, long n1, long n2);

/// Joint pmf on the data lattice: joint_pmf at the back-transformed
/// arguments. Throws DataError for off-lattice inputs.
double shifted_pmf(const CdphParams& params, double x1, double x2);

/// E[z0^{tau12} z1^{tau1-tau12} z2^{tau2-tau12}]. Guaranteed for arguments
/// in [0,1]; values slightly above 1 are attempted and guarded by the
/// resolvent convergence check (needed by numeric differentiation).
double joint_pgf_latent(const CdphParams& params, double z0, double z1, double z2);

/// E[z1^{tau1} z2^{tau2}]: the latent pgf at z0 = z1 z2.
double joint_pgf(const CdphParams& params, double z1, double z2);

/// E[tau12^{[n0]} (tau1-tau12)^{[n1]} (tau2-tau12)^{[n2]}] (falling
/// factorials), via the derivative matrices n! T^{n-1} (I-T)^{-n-1}.
double factorial_moment_latent(const CdphParams& params, int n0, int n1, int n2);

/// E[tau1^{r1} tau2^{r2}] by binomial expansion over the latent triple and
/// Stirling conversion of powers to falling factorials. Throws for
/// r1 + r2 beyond `order_cap`.
double cross_moment(const CdphParams& params, int r1, int r2, int order_cap = 6);

struct CdphDraw {
    long tau1 = 0;
    long tau2 = 0;
    LatentTriple latent;
};

/// Exact simulation: shared E-phase to its exit state, then two independent
/// S-phases from that state. tau_k = m + z_k by construction.
CdphDraw cdph_sample(const CdphParams& params, Rng& rng);

/// Marginal law of tau_k: DPH((alpha, 0), [[P, U], [0, Q_k]]).
DphParams marginal_dph(const CdphParams& params, int coordinate);

/// Law of the shared phase length tau12: DPH(alpha, P).
DphParams common_shock_dph(const CdphParams& params);

/// Incremental cache for grid-heavy evaluation (pmf grids, likelihoods,
/// E-step inner sums). Caches alpha P^{m-1}, alpha P^{m-1} U, P^{m-1} U and
/// the exit actions Q_k^{z-1} q_k, extending on demand.
///
/// Instances are cheap to build and not safe for concurrent use: share the
/// immutable CdphParams across threads and give each thread its own
/// evaluator.
class CdphEvaluator {
public:
    explicit CdphEvaluator(const CdphParams& params);

    const CdphParams& params() const { return params_; }

    double psi(long m, long z1, long z2);
    double pmf(long n1, long n2);
    double pmf_conditional(std::size_t state, long n1, long n2);

    /// Fills `out` (length |E|) with f(n1, n2 | i) for every E-state i,
    /// and returns f(n1, n2). One backward first-step recursion.
    double pmf_all_conditionals(long n1, long n2, Vec& out);

    /// alpha P^{m-1} (row over E), m >= 1.
    const Vec& shock_front(long m);
    /// alpha P^{m-1} U (row over S), m >= 1.
    const Vec& entry_row(long m);
    /// Q1^{z-1} q1 (column over S), z >= 1.
    const Vec& tail1(long z);
    /// Q2^{z-1} q2 (column over S), z >= 1.
    const Vec& tail2(long z);

    /// Smallest n with P(tau_k > n) < tail_tol.
    long support_bound1(double tail_tol);
    long support_bound2(double tail_tol);

    /// Marginal pmf of tau_k at n (blocked representation, cached).
    double marginal_pmf1(long n);
    double marginal_pmf2(long n);

private:
    void ensure_shock(long m);
    void ensure_tail1(long z);
    void ensure_tail2(long z);
    void ensure_marginal1(long n);
    void ensure_marginal2(long n);

    CdphParams params_;
    std::vector<Vec> shock_fronts_; // alpha P^{m-1}, index m-1
    std::vector<Vec> entry_rows_;   // alpha P^{m-1} U, index m-1
    std::vector<Vec> tails1_;       // Q1^{z-1} q1, index z-1
    std::vector<Vec> tails2_;
    // marginal chains (alpha,0) over E+S advanced through [[P,U],[0,Qk]]
    std::vector<Vec> marg1_fronts_, marg2_fronts_;
    Vec marg1_exit_, marg2_exit_;
};

} // namespace cdph
