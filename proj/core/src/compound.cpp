#include "cdph/compound.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cdph {

MphStarParams::MphStarParams(Vec pi_in, Matrix subintensity_in, Matrix rewards_in)
    : pi(std::move(pi_in)), subintensity(std::move(subintensity_in)), rewards(std::move(rewards_in)) {
    const std::size_t n = pi.size();
    if (n == 0) throw ValidationError("MphStarParams: empty state space");
    if (!subintensity.square() || subintensity.rows() != n)
        throw ValidationError("MphStarParams: subintensity must be |C| x |C|");
    if (rewards.rows() != 2 || rewards.cols() != n)
        throw ValidationError("MphStarParams: rewards must be 2 x |C|");
    subintensity.require_finite("MphStarParams");
    rewards.require_finite("MphStarParams");

    double mass = 0.0;
    for (double p : pi) {
        if (!(p >= 0.0)) throw ValidationError("MphStarParams: pi entry negative or NaN");
        mass += p;
    }
    if (std::abs(mass - 1.0) > tol::row_sum_slack)
        throw ValidationError("MphStarParams: pi must sum to 1");

    double max_rate = 0.0;
    bool any_exit = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(subintensity(i, i) < 0.0))
            throw ValidationError("MphStarParams: diagonal of S must be negative");
        double rs = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && subintensity(i, j) < -tol::entry_clamp)
                throw ValidationError("MphStarParams: negative off-diagonal rate");
            rs += subintensity(i, j);
        }
        if (rs > tol::row_sum_slack)
            throw ValidationError("MphStarParams: row sums of S must be <= 0");
        if (rs < -tol::row_sum_slack) any_exit = true;
        max_rate = std::max(max_rate, -subintensity(i, i));
    }
    if (!any_exit) throw ValidationError("MphStarParams: no state exits (all row sums zero)");

    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < n; ++j)
            if (!(rewards(k, j) >= 0.0)) throw ValidationError("MphStarParams: negative reward");

    // absorption check through the uniformized jump chain
    Matrix uniformized = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            uniformized(i, j) += subintensity(i, j) / max_rate;
    if (!validate_substochastic(uniformized).terminates)
        throw ValidationError("MphStarParams: chain fails the absorption check");
}

Vec MphStarParams::exit_rates() const {
    Vec exit(dim());
    for (std::size_t i = 0; i < dim(); ++i) exit[i] = std::max(0.0, -subintensity.row_sum(i));
    return exit;
}

double compound_laplace(const CdphParams& params, const LaplaceTransform& lt1,
                        const LaplaceTransform& lt2, LaplacePoint point) {
    const double a1 = lt1(point.theta1);
    const double a2 = lt2(point.theta2);
    auto check = [](double a, double theta, const char* which) {
        if (theta >= 0.0 && !(a > 0.0 && a <= 1.0))
            throw ValidationError(std::string("compound_laplace: summand transform ") + which +
                                  " outside (0, 1] at theta >= 0");
        if (!(a > 0.0) || !std::isfinite(a))
            throw ValidationError(std::string("compound_laplace: summand transform ") + which +
                                  " not positive and finite");
    };
    check(a1, point.theta1, "1");
    check(a2, point.theta2, "2");
    return joint_pgf(params, a1, a2);
}

double mphstar_laplace(const MphStarParams& params, LaplacePoint point) {
    const std::size_t n = params.dim();
    Matrix system(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) system(i, j) = -params.subintensity(i, j);
        system(i, i) += point.theta1 * params.rewards(0, i) + point.theta2 * params.rewards(1, i);
    }
    LuSolver lu(std::move(system));
    if (lu.singular()) throw NumericError("mphstar_laplace: singular system");
    const Vec w = lu.solve(params.exit_rates());
    return dot(params.pi, w);
}

MphStarParams build_compound_mphstar(const CdphParams& counts, const MphStarParams& summand) {
    const CoupledChainParams chain = build_coupled_chain(counts);
    const std::size_t nb = chain.total_dim();
    const std::size_t nc = summand.dim();
    const std::size_t n = nb * nc;

    // restart matrix: summand completion rates routed into a fresh summand
    Matrix restart(nc, nc, 0.0);
    const Vec exit_rates = summand.exit_rates();
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j) restart(i, j) = exit_rates[i] * summand.pi[j];

    Matrix sub = kron(Matrix::identity(nb), summand.subintensity) + kron(chain.pmax, restart);

    Vec init(n, 0.0);
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t c = 0; c < nc; ++c) init[b * nc + c] = chain.init[b] * summand.pi[c];

    Matrix rewards(2, n, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const CoupledBlock block = chain.state_ref(b).block;
        const bool first_active = block != CoupledBlock::FirstDone;
        const bool second_active = block != CoupledBlock::SecondDone;
        for (std::size_t c = 0; c < nc; ++c) {
            if (first_active) rewards(0, b * nc + c) = summand.rewards(0, c);
            if (second_active) rewards(1, b * nc + c) = summand.rewards(1, c);
        }
    }
    return MphStarParams(std::move(init), std::move(sub), std::move(rewards));
}

namespace {

struct Stencil {
    std::vector<double> coeffs;
    std::vector<int> offsets;
};

Stencil stencil_for(int order) {
    switch (order) {
        case 0: return {{1.0}, {0}};
        case 1: return {{-0.5, 0.5}, {-1, 1}};
        case 2: return {{1.0, -2.0, 1.0}, {-1, 0, 1}};
        default: throw ValidationError("numeric moments: orders must be in {0, 1, 2}");
    }
}

/// E[Y1^{r1} Y2^{r2}] = (-1)^{r1+r2} d^{r1+r2} L / d theta1^{r1} d theta2^{r2}
/// at (0, 0), by a tensor product of central-difference stencils.
double central_difference(const std::function<double(double, double)>& laplace, int r1, int r2,
                          double h) {
    const Stencil s1 = stencil_for(r1);
    const Stencil s2 = stencil_for(r2);
    double acc = 0.0;
    for (std::size_t i = 0; i < s1.coeffs.size(); ++i)
        for (std::size_t j = 0; j < s2.coeffs.size(); ++j)
            acc += s1.coeffs[i] * s2.coeffs[j] * laplace(s1.offsets[i] * h, s2.offsets[j] * h);
    const double sign = (r1 + r2) % 2 == 0 ? 1.0 : -1.0;
    return sign * acc / std::pow(h, r1 + r2);
}

NumericMoment richardson_moment(const std::function<double(double, double)>& laplace, int r1,
                                int r2, double h) {
    if (r1 < 0 || r2 < 0 || r1 > 2 || r2 > 2)
        throw ValidationError("numeric moments: orders must be in {0, 1, 2}");
    if (r1 + r2 == 0) return {1.0, 0.0};
    const double coarse = central_difference(laplace, r1, r2, h);
    const double fine = central_difference(laplace, r1, r2, h / 2.0);
    // both stencils are O(h^2): one Richardson level removes the h^2 term
    const double value = (4.0 * fine - coarse) / 3.0;
    const double error = std::abs(fine - coarse) / 3.0;
    if (!std::isfinite(value) ||
        (std::abs(value) > 1e-8 && error > 0.05 * std::abs(value) + 1e-8))
        throw NumericError("numeric moment extrapolation did not converge");
    return {value, error};
}

} // namespace

NumericMoment compound_cross_moment_numeric(const CdphParams& params, const LaplaceTransform& lt1,
                                            const LaplaceTransform& lt2, int r1, int r2,
                                            double step) {
    auto laplace = [&](double t1, double t2) {
        return compound_laplace(params, lt1, lt2, {t1, t2});
    };
    return richardson_moment(laplace, r1, r2, step);
}

NumericMoment mphstar_cross_moment_numeric(const MphStarParams& params, int r1, int r2,
                                           double step) {
    auto laplace = [&](double t1, double t2) { return mphstar_laplace(params, {t1, t2}); };
    return richardson_moment(laplace, r1, r2, step);
}

std::pair<double, double> mphstar_sample(const MphStarParams& params, Rng& rng) {
    const std::size_t n = params.dim();
    double max_rate = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_rate = std::max(max_rate, -params.subintensity(i, i));

    // uniformized jump chain: K = I + S / max_rate, exit row mass = exit/max_rate
    std::size_t state = rng.categorical(params.pi);
    if (state == n) state = n - 1; // fp dust in pi

    double x1 = 0.0, x2 = 0.0;
    while (true) {
        const double hold = rng.exponential(max_rate);
        x1 += params.rewards(0, state) * hold;
        x2 += params.rewards(1, state) * hold;
        Vec row(n + 1, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            row[j] = params.subintensity(state, j) / max_rate + (j == state ? 1.0 : 0.0);
        row[n] = std::max(0.0, -params.subintensity.row_sum(state)) / max_rate;
        double rs = 0.0;
        for (double v : row) rs += v;
        const double u = rng.uniform() * rs;
        double acc = 0.0;
        std::size_t next = n;
        for (std::size_t j = 0; j <= n; ++j) {
            acc += row[j];
            if (u < acc) {
                next = j;
                break;
            }
        }
        if (next == n) return {x1, x2};
        state = next;
    }
}

std::pair<double, double> compound_sample(const CdphParams& params, const SummandSampler& sampler,
                                          Rng& rng) {
    const CdphDraw counts = cdph_sample(params, rng);
    const long total = std::max(counts.tau1, counts.tau2);
    double y1 = 0.0, y2 = 0.0;
    for (long l = 1; l <= total; ++l) {
        const auto [x1, x2] = sampler(rng);
        if (l <= counts.tau1) y1 += x1;
        if (l <= counts.tau2) y2 += x2;
    }
    return {y1, y2};
}

} // namespace cdph
