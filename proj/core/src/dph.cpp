#include "cdph/dph.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace cdph {

DphParams::DphParams(Vec alpha_in, Matrix transition_in, bool allow_mass_deficit)
    : alpha(std::move(alpha_in)), transition(std::move(transition_in)) {
    if (!transition.square()) throw ValidationError("DphParams: transition matrix not square");
    if (alpha.size() != transition.rows())
        throw ValidationError("DphParams: alpha length does not match transition dimension");
    if (alpha.empty()) throw ValidationError("DphParams: empty representation");
    transition.require_finite("DphParams");

    double mass = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw ValidationError("DphParams: alpha entry negative or NaN");
        mass += a;
    }
    if (mass > 1.0 + tol::row_sum_slack)
        throw ValidationError("DphParams: alpha mass exceeds 1");
    mass_deficit_ = std::max(0.0, 1.0 - mass);
    if (!allow_mass_deficit && std::abs(mass - 1.0) > tol::row_sum_slack)
        throw ValidationError("DphParams: alpha must sum to 1 (mass deficit not enabled)");

    const SubstochasticReport report = validate_substochastic(transition);
    if (!report.entries_in_range)
        throw ValidationError("DphParams: transition entries outside [0, 1]");
    if (!report.row_sums_ok)
        throw ValidationError("DphParams: transition row sums exceed 1");
    if (!report.terminates)
        throw ValidationError("DphParams: chain fails the termination check");
}

Vec DphParams::exit_vector() const {
    Vec exit(dim());
    for (std::size_t i = 0; i < dim(); ++i) exit[i] = 1.0 - transition.row_sum(i);
    return exit;
}

double dph_pmf(const DphParams& params, long ell) {
    if (ell < 1) throw ValidationError("dph_pmf: argument must be >= 1");
    Vec front = params.alpha;
    for (long t = 1; t < ell; ++t) front = vec_mat(front, params.transition);
    return dot(front, params.exit_vector());
}

double dph_tail(const DphParams& params, long ell) {
    if (ell < 0) throw ValidationError("dph_tail: negative argument");
    Vec front = params.alpha;
    for (long t = 0; t < ell; ++t) front = vec_mat(front, params.transition);
    return sum(front);
}

double dph_cdf(const DphParams& params, long ell) {
    if (ell < 0) return 0.0;
    return 1.0 - dph_tail(params, ell);
}

double dph_pgf(const DphParams& params, double x) {
    if (x == 0.0) return params.mass_deficit();
    const Vec w = resolvent_apply(params.transition, x, params.exit_vector());
    return x * dot(params.alpha, w) + params.mass_deficit();
}

double dph_factorial_moment(const DphParams& params, int order) {
    if (order < 1) throw ValidationError("dph_factorial_moment: order must be >= 1");
    const std::size_t n = params.dim();
    Matrix system = Matrix::identity(n) - params.transition;
    LuSolver lu(system);
    if (lu.singular()) throw NumericError("dph_factorial_moment: I - P singular");

    Vec w = params.exit_vector();
    for (int k = 0; k <= order; ++k) w = lu.solve(w); // (I-P)^{-order-1} applied to the exit vector
    Vec front = params.alpha;
    for (int k = 1; k < order; ++k) front = vec_mat(front, params.transition);
    double factorial = 1.0;
    for (int k = 2; k <= order; ++k) factorial *= k;
    return factorial * dot(front, w);
}

double dph_mean(const DphParams& params) { return dph_factorial_moment(params, 1); }

long dph_sample(const DphParams& params, Rng& rng) {
    std::size_t state = rng.categorical(params.alpha);
    if (state == params.alpha.size()) return 0; // initial mass deficit: absorbed before step 1
    long steps = 0;
    while (true) {
        ++steps;
        state = rng.categorical(params.transition.row(state));
        if (state == params.dim()) return steps; // leftover row mass = absorption
    }
}

long dph_support_bound(const DphParams& params, double tail_tol) {
    Vec front = params.alpha;
    long ell = 0;
    while (sum(front) >= tail_tol) {
        front = vec_mat(front, params.transition);
        ++ell;
        if (ell > 100000000L)
            throw NumericError("dph_support_bound: tail does not fall below tolerance");
    }
    return ell;
}

} // namespace cdph
