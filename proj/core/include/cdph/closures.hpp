#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cdph/cdph.hpp"
#include "cdph/dph.hpp"

namespace cdph {

/// Blocks of the coupled chain tracking both coordinates at once, in flat
/// order: E, then S x S (row-major lexicographic), then {d1} x S (first
/// coordinate finished), then S x {d2} (second coordinate finished).
enum class CoupledBlock { CommonShock, BothActive, FirstDone, SecondDone };

struct CoupledStateRef {
    CoupledBlock block;
    std::size_t first = 0;  ///< E index, or coordinate-1 S index
    std::size_t second = 0; ///< coordinate-2 S index where applicable
};

/// Parameters of the coupled chain: initial vector (alpha, 0, 0, 0) and the
/// 4 x 4 block transition matrix
///   [ P   U*            0        0  ]
///   [ 0   Q1 (x) Q2     q1 (x) Q2   Q1 (x) q2 ]
///   [ 0   0             Q2       0  ]
///   [ 0   0             0        Q1 ]
/// with U*_{i,(j,j)} = U_{ij} on the diagonal pairs. Its absorption step is
/// max(tau1, tau2); exit from the first two blocks is min(tau1, tau2).
struct CoupledChainParams {
    Vec init;
    Matrix pmax;
    std::size_t dim_e = 0;
    std::size_t dim_s = 0;

    std::size_t total_dim() const { return dim_e + dim_s * dim_s + 2 * dim_s; }

    /// Decodes a flat state index into its block and within-block coordinates.
    CoupledStateRef state_ref(std::size_t flat) const;
};

CoupledChainParams build_coupled_chain(const CdphParams& params);

/// max(tau1, tau2) ~ DPH((alpha,0,0,0), Pmax).
DphParams max_dph(const CdphParams& params);

/// min(tau1, tau2) ~ DPH((alpha,0), Pmin) over E u (S x S).
DphParams min_dph(const CdphParams& params);

/// tau1 + tau2 as a DPH law. Built by state duplication on the coupled
/// chain: every state where both coordinates are active (E and S x S, which
/// contribute two steps per visit) splits into an entry state and a
/// pass-through state, so each visit consumes two steps; single-coordinate
/// states are kept as-is.
DphParams sum_dph(const CdphParams& params);

/// Finite mixture: block-diagonal assembly with alpha blocks scaled by the
/// weights. Weights must be positive and sum to 1 within 1e-9; all
/// components must share one shift.
CdphParams mixture(const std::vector<std::pair<double, CdphParams>>& components);

/// (tau1(a)+tau1(b), tau2(a)+tau2(b)) for independent CDPH pairs, as a CDPH
/// law on E_sum = E(a) u (S(a) x E(b)), S_sum = (S(a) x S(b)) u S(b). Both
/// inputs must carry the default shift.
CdphParams sum_of_vectors(const CdphParams& a, const CdphParams& b);

} // namespace cdph
