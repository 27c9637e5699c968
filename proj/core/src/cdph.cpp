#include "cdph/cdph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace cdph {

namespace {

long checked_back_transform(double x, double c, double k, const char* which) {
    const double raw = (x - k) / c;
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-9)
        throw DataError(std::string("off-lattice value for coordinate ") + which);
    return static_cast<long>(rounded) + 2;
}

double dot3(const Vec& a, const Vec& b, const Vec& c) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j] * c[j];
    return s;
}

} // namespace

long Shift::to_tau1(double x) const { return checked_back_transform(x, c1, k1, "1"); }
long Shift::to_tau2(double x) const { return checked_back_transform(x, c2, k2, "2"); }

bool Shift::on_lattice1(double x) const {
    const double raw = (x - k1) / c1;
    return std::abs(raw - std::round(raw)) <= 1e-9 && std::round(raw) >= 0.0;
}

bool Shift::on_lattice2(double x) const {
    const double raw = (x - k2) / c2;
    return std::abs(raw - std::round(raw)) <= 1e-9 && std::round(raw) >= 0.0;
}

CdphParams::CdphParams(Vec alpha_in, Matrix p, Matrix u, Matrix q1, Matrix q2, Shift shift_in)
    : alpha(std::move(alpha_in)),
      P(std::move(p)),
      U(std::move(u)),
      Q1(std::move(q1)),
      Q2(std::move(q2)),
      shift(shift_in) {
    const std::size_t e = alpha.size();
    if (e == 0) throw ValidationError("CdphParams: empty E space");
    if (!P.square() || P.rows() != e) throw ValidationError("CdphParams: P must be |E| x |E|");
    if (U.rows() != e) throw ValidationError("CdphParams: U row count must be |E|");
    const std::size_t s = U.cols();
    if (s == 0) throw ValidationError("CdphParams: empty S space");
    if (!Q1.square() || Q1.rows() != s || !Q2.square() || Q2.rows() != s)
        throw ValidationError("CdphParams: Q1, Q2 must be |S| x |S|");
    for (const Matrix* m : {&P, &U, &Q1, &Q2}) m->require_finite("CdphParams");
    if (!(shift.c1 > 0.0) || !(shift.c2 > 0.0))
        throw ValidationError("CdphParams: shift scales must be positive");

    double mass = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw ValidationError("CdphParams: alpha entry negative or NaN");
        mass += a;
    }
    if (std::abs(mass - 1.0) > tol::row_sum_slack)
        throw ValidationError("CdphParams: alpha must sum to 1");

    for (std::size_t i = 0; i < e; ++i) {
        double rs = P.row_sum(i) + U.row_sum(i);
        for (std::size_t j = 0; j < e; ++j)
            if (!(P(i, j) >= 0.0)) throw ValidationError("CdphParams: negative entry in P");
        for (std::size_t j = 0; j < s; ++j)
            if (!(U(i, j) >= 0.0)) throw ValidationError("CdphParams: negative entry in U");
        if (std::abs(rs - 1.0) > tol::row_sum_slack)
            throw ValidationError("CdphParams: row of (P U) does not sum to 1");
    }

    // the shared phase must end
    if (!validate_substochastic(P).terminates)
        throw ValidationError("CdphParams: P fails the termination check");

    auto check_q = [](const Matrix& q, const char* name) {
        const SubstochasticReport r = validate_substochastic(q);
        if (!r.entries_in_range)
            throw ValidationError(std::string("CdphParams: ") + name + " entries outside [0, 1]");
        if (!r.row_sums_ok)
            throw ValidationError(std::string("CdphParams: ") + name + " row sums exceed 1");
        if (!r.terminates)
            throw ValidationError(std::string("CdphParams: ") + name + " fails the termination check");
    };
    check_q(Q1, "Q1");
    check_q(Q2, "Q2");

    auto exit_of = [&](const Matrix& q) {
        Vec exit(s);
        for (std::size_t i = 0; i < s; ++i) {
            double v = 1.0 - q.row_sum(i);
            if (v < -tol::entry_clamp)
                throw ValidationError("CdphParams: exit vector entry below -1e-12");
            exit[i] = std::max(v, 0.0);
        }
        return exit;
    };
    exit1_ = exit_of(Q1);
    exit2_ = exit_of(Q2);
}

double psi(const CdphParams& params, long m, long z1, long z2) {
    if (m < 1 || z1 < 1 || z2 < 1) throw ValidationError("psi: arguments must be >= 1");
    Vec front = params.alpha;
    for (long t = 1; t < m; ++t) front = vec_mat(front, params.P);
    const Vec entry = vec_mat(front, params.U);
    Vec v1 = params.exit1();
    for (long t = 1; t < z1; ++t) v1 = mat_vec(params.Q1, v1);
    Vec v2 = params.exit2();
    for (long t = 1; t < z2; ++t) v2 = mat_vec(params.Q2, v2);
    return dot3(entry, v1, v2);
}

double psi_conditional(const CdphParams& params, std::size_t state, long m, long z1, long z2) {
    if (state >= params.dim_e()) throw ValidationError("psi_conditional: E-state index out of range");
    if (m < 1 || z1 < 1 || z2 < 1) throw ValidationError("psi_conditional: arguments must be >= 1");
    Vec front(params.dim_e(), 0.0);
    front[state] = 1.0;
    for (long t = 1; t < m; ++t) front = vec_mat(front, params.P);
    const Vec entry = vec_mat(front, params.U);
    Vec v1 = params.exit1();
    for (long t = 1; t < z1; ++t) v1 = mat_vec(params.Q1, v1);
    Vec v2 = params.exit2();
    for (long t = 1; t < z2; ++t) v2 = mat_vec(params.Q2, v2);
    return dot3(entry, v1, v2);
}

double joint_pmf(const CdphParams& params, long n1, long n2) {
    CdphEvaluator eval(params);
    return eval.pmf(n1, n2);
}

double joint_pmf_conditional(const CdphParams& params, std::size_t state, long n1, long n2) {
    CdphEvaluator eval(params);
    return eval.pmf_conditional(state, n1, n2);
}

double shifted_pmf(const CdphParams& params, double x1, double x2) {
    if (!params.shift.on_lattice1(x1) || !params.shift.on_lattice2(x2))
        throw DataError("shifted_pmf: arguments off the declared lattice");
    return joint_pmf(params, params.shift.to_tau1(x1), params.shift.to_tau2(x2));
}

double joint_pgf_latent(const CdphParams& params, double z0, double z1, double z2) {
    if (z0 < 0.0 || z1 < 0.0 || z2 < 0.0)
        throw ValidationError("joint_pgf_latent: negative argument");
    if (z0 == 0.0 || z1 == 0.0 || z2 == 0.0) return 0.0; // every latent variable is >= 1

    // (I z^{-1} - T)^{-1} = z (I - zT)^{-1}
    Vec row_e = resolvent_apply(params.P.transposed(), z0, params.alpha);
    for (double& v : row_e) v *= z0;
    const Vec entry = vec_mat(row_e, params.U);
    Vec v1 = resolvent_apply(params.Q1, z1, params.exit1());
    for (double& v : v1) v *= z1;
    Vec v2 = resolvent_apply(params.Q2, z2, params.exit2());
    for (double& v : v2) v *= z2;
    return dot3(entry, v1, v2);
}

double joint_pgf(const CdphParams& params, double z1, double z2) {
    return joint_pgf_latent(params, z1 * z2, z1, z2);
}

namespace {

/// Row action of n! T^{n-1} (I-T)^{-n-1} on `row` (for n = 0: (I-T)^{-1}).
Vec derivative_row_action(const Vec& row, const Matrix& t, int n) {
    LuSolver lu((Matrix::identity(t.rows()) - t).transposed());
    Vec out = row;
    const int solves = n == 0 ? 1 : n + 1;
    for (int k = 0; k < solves; ++k) out = lu.solve(out);
    for (int k = 1; k < n; ++k) out = vec_mat(out, t);
    double factorial = 1.0;
    for (int k = 2; k <= n; ++k) factorial *= k;
    for (double& v : out) v *= factorial;
    return out;
}

/// Column action: n! T^{n-1} (I-T)^{-n-1} applied to `col`.
Vec derivative_col_action(const Vec& col, const Matrix& t, int n) {
    LuSolver lu(Matrix::identity(t.rows()) - t);
    Vec out = col;
    const int solves = n == 0 ? 1 : n + 1;
    for (int k = 0; k < solves; ++k) out = lu.solve(out);
    for (int k = 1; k < n; ++k) out = mat_vec(t, out);
    double factorial = 1.0;
    for (int k = 2; k <= n; ++k) factorial *= k;
    for (double& v : out) v *= factorial;
    return out;
}

} // namespace

double factorial_moment_latent(const CdphParams& params, int n0, int n1, int n2) {
    if (n0 < 0 || n1 < 0 || n2 < 0)
        throw ValidationError("factorial_moment_latent: negative order");
    const Vec row_e = derivative_row_action(params.alpha, params.P, n0);
    const Vec entry = vec_mat(row_e, params.U);
    const Vec v1 = derivative_col_action(params.exit1(), params.Q1, n1);
    const Vec v2 = derivative_col_action(params.exit2(), params.Q2, n2);
    return dot3(entry, v1, v2);
}

namespace {

constexpr int kMaxStirlingOrder = 16;

/// Stirling numbers of the second kind by recurrence; exact in doubles for
/// the orders used here.
double stirling2(int n, int k) {
    static const auto table = [] {
        std::array<std::array<double, kMaxStirlingOrder + 1>, kMaxStirlingOrder + 1> t{};
        t[0][0] = 1.0;
        for (int n = 1; n <= kMaxStirlingOrder; ++n)
            for (int k = 1; k <= n; ++k)
                t[n][k] = static_cast<double>(k) * t[n - 1][k] + t[n - 1][k - 1];
        return t;
    }();
    return table[n][k];
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

} // namespace

double cross_moment(const CdphParams& params, int r1, int r2, int order_cap) {
    if (r1 < 0 || r2 < 0) throw ValidationError("cross_moment: negative order");
    if (r1 + r2 > order_cap) throw ValidationError("cross_moment: order cap exceeded");
    if (r1 + r2 > kMaxStirlingOrder) throw ValidationError("cross_moment: order beyond table");

    // Memoized latent falling-factorial moments up to the needed orders.
    const int top = r1 + r2;
    std::vector<double> fml(static_cast<std::size_t>((top + 1) * (top + 1) * (top + 1)), -1.0);
    auto latent = [&](int a, int b, int c) {
        std::size_t idx = static_cast<std::size_t>((a * (top + 1) + b) * (top + 1) + c);
        if (fml[idx] < 0.0) fml[idx] = factorial_moment_latent(params, a, b, c);
        return fml[idx];
    };
    // tau1 = a + b, tau2 = a + c with (a, b, c) the latent triple
    auto power_moment = [&](int p, int q, int s) {
        double total = 0.0;
        for (int k0 = 0; k0 <= p; ++k0)
            for (int k1 = 0; k1 <= q; ++k1)
                for (int k2 = 0; k2 <= s; ++k2) {
                    const double coeff = stirling2(p, k0) * stirling2(q, k1) * stirling2(s, k2);
                    if (coeff != 0.0) total += coeff * latent(k0, k1, k2);
                }
        return total;
    };

    double total = 0.0;
    for (int i = 0; i <= r1; ++i)
        for (int j = 0; j <= r2; ++j)
            total += binomial(r1, i) * binomial(r2, j) * power_moment(i + j, r1 - i, r2 - j);
    return total;
}

namespace {

/// Draw from a probability row (absorbing option last); floating-point dust
/// past the cumulative sum clamps to the last positive entry.
std::size_t sample_row(Rng& rng, const Vec& probs) {
    std::size_t idx = rng.categorical(probs);
    if (idx < probs.size()) return idx;
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return i;
    throw NumericError("sample_row: all-zero probability row");
}

} // namespace

CdphDraw cdph_sample(const CdphParams& params, Rng& rng) {
    const std::size_t e = params.dim_e();
    const std::size_t s = params.dim_s();

    std::size_t state = sample_row(rng, params.alpha);

    // shared phase: each step draws from the row (P_i. , U_i.), which sums to 1
    long m = 0;
    std::size_t entry = 0;
    while (true) {
        ++m;
        Vec row(e + s);
        for (std::size_t j = 0; j < e; ++j) row[j] = params.P(state, j);
        for (std::size_t j = 0; j < s; ++j) row[e + j] = params.U(state, j);
        const std::size_t next = sample_row(rng, row);
        if (next >= e) {
            entry = next - e;
            break;
        }
        state = next;
    }

    auto run_tail = [&](const Matrix& q, const Vec& exit) {
        long z = 1;
        std::size_t st = entry;
        while (true) {
            Vec row(s + 1);
            for (std::size_t j = 0; j < s; ++j) row[j] = q(st, j);
            row[s] = exit[st];
            const std::size_t next = sample_row(rng, row);
            if (next == s) return z;
            st = next;
            ++z;
        }
    };

    CdphDraw draw;
    draw.latent.m = m;
    draw.latent.z1 = run_tail(params.Q1, params.exit1());
    draw.latent.z2 = run_tail(params.Q2, params.exit2());
    draw.tau1 = m + draw.latent.z1;
    draw.tau2 = m + draw.latent.z2;
    return draw;
}

DphParams marginal_dph(const CdphParams& params, int coordinate) {
    if (coordinate != 1 && coordinate != 2)
        throw ValidationError("marginal_dph: coordinate must be 1 or 2");
    const std::size_t e = params.dim_e();
    const std::size_t s = params.dim_s();
    Vec alpha(e + s, 0.0);
    std::copy(params.alpha.begin(), params.alpha.end(), alpha.begin());
    Matrix blocked(e + s, e + s, 0.0);
    blocked.set_block(0, 0, params.P);
    blocked.set_block(0, e, params.U);
    blocked.set_block(e, e, coordinate == 1 ? params.Q1 : params.Q2);
    return DphParams(std::move(alpha), std::move(blocked));
}

DphParams common_shock_dph(const CdphParams& params) {
    return DphParams(params.alpha, params.P);
}

CdphEvaluator::CdphEvaluator(const CdphParams& params) : params_(params) {
    shock_fronts_.push_back(params_.alpha);
    entry_rows_.push_back(vec_mat(params_.alpha, params_.U));
    tails1_.push_back(params_.exit1());
    tails2_.push_back(params_.exit2());

    const std::size_t e = params_.dim_e();
    const std::size_t s = params_.dim_s();
    Vec start(e + s, 0.0);
    std::copy(params_.alpha.begin(), params_.alpha.end(), start.begin());
    marg1_fronts_.push_back(start);
    marg2_fronts_.push_back(std::move(start));
    marg1_exit_.assign(e + s, 0.0);
    marg2_exit_.assign(e + s, 0.0);
    for (std::size_t i = 0; i < s; ++i) {
        marg1_exit_[e + i] = params_.exit1()[i];
        marg2_exit_[e + i] = params_.exit2()[i];
    }
}

void CdphEvaluator::ensure_shock(long m) {
    while (static_cast<long>(shock_fronts_.size()) < m) {
        shock_fronts_.push_back(vec_mat(shock_fronts_.back(), params_.P));
        entry_rows_.push_back(vec_mat(shock_fronts_.back(), params_.U));
    }
}

void CdphEvaluator::ensure_tail1(long z) {
    while (static_cast<long>(tails1_.size()) < z)
        tails1_.push_back(mat_vec(params_.Q1, tails1_.back()));
}

void CdphEvaluator::ensure_tail2(long z) {
    while (static_cast<long>(tails2_.size()) < z)
        tails2_.push_back(mat_vec(params_.Q2, tails2_.back()));
}

namespace {

Vec advance_blocked(const Vec& front, const CdphParams& p, const Matrix& q) {
    const std::size_t e = p.dim_e();
    const std::size_t s = p.dim_s();
    Vec next(e + s, 0.0);
    for (std::size_t i = 0; i < e; ++i) {
        const double fi = front[i];
        if (fi == 0.0) continue;
        for (std::size_t j = 0; j < e; ++j) next[j] += fi * p.P(i, j);
        for (std::size_t j = 0; j < s; ++j) next[e + j] += fi * p.U(i, j);
    }
    for (std::size_t i = 0; i < s; ++i) {
        const double fi = front[e + i];
        if (fi == 0.0) continue;
        for (std::size_t j = 0; j < s; ++j) next[e + j] += fi * q(i, j);
    }
    return next;
}

} // namespace

void CdphEvaluator::ensure_marginal1(long n) {
    while (static_cast<long>(marg1_fronts_.size()) <= n)
        marg1_fronts_.push_back(advance_blocked(marg1_fronts_.back(), params_, params_.Q1));
}

void CdphEvaluator::ensure_marginal2(long n) {
    while (static_cast<long>(marg2_fronts_.size()) <= n)
        marg2_fronts_.push_back(advance_blocked(marg2_fronts_.back(), params_, params_.Q2));
}

const Vec& CdphEvaluator::shock_front(long m) {
    if (m < 1) throw ValidationError("shock_front: m must be >= 1");
    ensure_shock(m);
    return shock_fronts_[static_cast<std::size_t>(m - 1)];
}

const Vec& CdphEvaluator::entry_row(long m) {
    if (m < 1) throw ValidationError("entry_row: m must be >= 1");
    ensure_shock(m);
    return entry_rows_[static_cast<std::size_t>(m - 1)];
}

const Vec& CdphEvaluator::tail1(long z) {
    if (z < 1) throw ValidationError("tail1: z must be >= 1");
    ensure_tail1(z);
    return tails1_[static_cast<std::size_t>(z - 1)];
}

const Vec& CdphEvaluator::tail2(long z) {
    if (z < 1) throw ValidationError("tail2: z must be >= 1");
    ensure_tail2(z);
    return tails2_[static_cast<std::size_t>(z - 1)];
}

double CdphEvaluator::psi(long m, long z1, long z2) {
    if (m < 1 || z1 < 1 || z2 < 1) throw ValidationError("psi: arguments must be >= 1");
    return dot3(entry_row(m), tail1(z1), tail2(z2));
}

double CdphEvaluator::pmf(long n1, long n2) {
    if (n1 < 2 || n2 < 2) return 0.0;
    const long top = std::min(n1, n2) - 1;
    ensure_shock(top);
    ensure_tail1(n1 - 1);
    ensure_tail2(n2 - 1);
    double total = 0.0;
    for (long m = 1; m <= top; ++m)
        total += dot3(entry_rows_[static_cast<std::size_t>(m - 1)],
                      tails1_[static_cast<std::size_t>(n1 - m - 1)],
                      tails2_[static_cast<std::size_t>(n2 - m - 1)]);
    return total;
}

double CdphEvaluator::pmf_all_conditionals(long n1, long n2, Vec& out) {
    const std::size_t e = params_.dim_e();
    const std::size_t s = params_.dim_s();
    out.assign(e, 0.0);
    if (n1 < 2 || n2 < 2) return 0.0;
    const long top = std::min(n1, n2) - 2; // largest t with both back-shifted args >= 2
    ensure_tail1(n1 - 1);
    ensure_tail2(n2 - 1);

    // backward first-step recursion on F_t[j] = f(n1 - t, n2 - t | j):
    // F_t = u_t + P F_{t+1}, zero beyond the support boundary
    Vec f(e, 0.0);
    for (long t = top; t >= 0; --t) {
        Vec next = mat_vec(params_.P, f);
        const Vec& b1 = tails1_[static_cast<std::size_t>(n1 - t - 2)];
        const Vec& b2 = tails2_[static_cast<std::size_t>(n2 - t - 2)];
        for (std::size_t j = 0; j < e; ++j) {
            double u_term = 0.0;
            for (std::size_t r = 0; r < s; ++r) u_term += params_.U(j, r) * b1[r] * b2[r];
            next[j] += u_term;
        }
        f = std::move(next);
    }
    out = f;
    return dot(params_.alpha, f);
}

double CdphEvaluator::pmf_conditional(std::size_t state, long n1, long n2) {
    if (state >= params_.dim_e())
        throw ValidationError("pmf_conditional: E-state index out of range");
    Vec all;
    pmf_all_conditionals(n1, n2, all);
    return all[state];
}

long CdphEvaluator::support_bound1(double tail_tol) {
    long n = 0;
    while (true) {
        ensure_marginal1(n);
        if (sum(marg1_fronts_[static_cast<std::size_t>(n)]) < tail_tol) return n;
        ++n;
        if (n > 10000000L) throw NumericError("support_bound1: tail does not decay");
    }
}

long CdphEvaluator::support_bound2(double tail_tol) {
    long n = 0;
    while (true) {
        ensure_marginal2(n);
        if (sum(marg2_fronts_[static_cast<std::size_t>(n)]) < tail_tol) return n;
        ++n;
        if (n > 10000000L) throw NumericError("support_bound2: tail does not decay");
    }
}

double CdphEvaluator::marginal_pmf1(long n) {
    if (n < 1) return 0.0;
    ensure_marginal1(n - 1);
    return dot(marg1_fronts_[static_cast<std::size_t>(n - 1)], marg1_exit_);
}

double CdphEvaluator::marginal_pmf2(long n) {
    if (n < 1) return 0.0;
    ensure_marginal2(n - 1);
    return dot(marg2_fronts_[static_cast<std::size_t>(n - 1)], marg2_exit_);
}

} // namespace cdph
