#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "cdph/cdph.hpp"
#include "cdph/matrix.hpp"
#include "cdph/rng.hpp"

namespace cdph {

struct Observation {
    double x1 = 0.0; ///< data-scale values
    double x2 = 0.0;
    long tau1 = 0; ///< back-transformed model-scale values, >= 2
    long tau2 = 0;
    long weight = 0;
};

/// Weighted multiset of bivariate counts on a declared lattice. Ingestion
/// back-transforms every pair, rejects off-lattice values, and merges
/// duplicates.
class CountDataset {
public:
    CountDataset(const std::vector<std::tuple<double, double, long>>& rows, Shift shift);

    const std::vector<Observation>& observations() const { return observations_; }
    const Shift& shift() const { return shift_; }
    long total_weight() const { return total_weight_; }

private:
    std::vector<Observation> observations_;
    Shift shift_;
    long total_weight_ = 0;
};

/// Expected latent counts of the complete-data likelihood (real-valued:
/// E-step outputs are conditional expectations).
struct SufficientStats {
    Vec start_counts;    ///< A_i: starts in E-state i
    Matrix shock_jumps;  ///< N^A_{ij}: jumps within E
    Matrix exit_jumps;   ///< N^T_{ij}: jumps E -> S
    Matrix tail_jumps1;  ///< N^{B,1}_{ij}: coordinate-1 jumps within S
    Matrix tail_jumps2;  ///< N^{B,2}_{ij}
    Vec absorb1;         ///< N^{B,1}_i: coordinate-1 absorptions from S-state i
    Vec absorb2;         ///< N^{B,2}_i

    SufficientStats(std::size_t dim_e, std::size_t dim_s);
};

/// Sum of weight * log f(tau1, tau2); -infinity when any observed cell has
/// zero probability.
double log_likelihood(const CdphParams& params, const CountDataset& data);

/// Closed-form complete-data estimators: ratios of the sufficient
/// statistics, rows renormalized by construction. Rows with expected mass
/// below 1e-12 are frozen at `previous` (required in that case).
CdphParams mle_fully_observed(const SufficientStats& stats, const Shift& shift,
                              const CdphParams* previous = nullptr);

/// Conditional expectations of all seven latent statistics given the data.
/// Throws NumericError (naming the observation) if any observation has zero
/// probability under `params`.
SufficientStats e_step(const CdphParams& params, const CountDataset& data);

struct EmConfig {
    int max_iters = 500;
    double log_lik_tol = 0.0; ///< early stop when |delta| < tol for 10 consecutive iterations
    std::uint64_t seed = 0;
    std::size_t dim_e = 1;
    std::size_t dim_s = 1;
    int init_retries = 25;
};

struct EmResult {
    CdphParams params;
    std::vector<double> log_likelihood_trace; ///< recorded after each M-step
};

/// Random initial parameters: independent uniform(0,1) entries with each
/// row of (P U), each row of (Q_k | exit), and alpha normalized to sum 1.
CdphParams random_cdph(std::size_t dim_e, std::size_t dim_s, const Shift& shift, Rng& rng);

/// EM iteration until the budget (or early stop). The likelihood trace is
/// non-decreasing up to floating-point slack.
EmResult em_fit(const CountDataset& data, const EmConfig& config);

} // namespace cdph
