#include "cdph/closures.hpp"

#include <algorithm>
#include <cmath>

namespace cdph {

CoupledStateRef CoupledChainParams::state_ref(std::size_t flat) const {
    const std::size_t ss = dim_s * dim_s;
    if (flat < dim_e) return {CoupledBlock::CommonShock, flat, 0};
    flat -= dim_e;
    if (flat < ss) return {CoupledBlock::BothActive, flat / dim_s, flat % dim_s};
    flat -= ss;
    if (flat < dim_s) return {CoupledBlock::FirstDone, flat, 0};
    flat -= dim_s;
    if (flat < dim_s) return {CoupledBlock::SecondDone, flat, 0};
    throw DimensionError("CoupledChainParams::state_ref: index out of range");
}

CoupledChainParams build_coupled_chain(const CdphParams& params) {
    const std::size_t e = params.dim_e();
    const std::size_t s = params.dim_s();
    const std::size_t ss = s * s;
    const std::size_t n = e + ss + 2 * s;

    CoupledChainParams chain;
    chain.dim_e = e;
    chain.dim_s = s;
    chain.init.assign(n, 0.0);
    std::copy(params.alpha.begin(), params.alpha.end(), chain.init.begin());

    Matrix pmax(n, n, 0.0);
    pmax.set_block(0, 0, params.P);

    // U*: exit from the shared phase lands on diagonal pairs (j, j)
    for (std::size_t i = 0; i < e; ++i)
        for (std::size_t j = 0; j < s; ++j)
            pmax(i, e + j * s + j) = params.U(i, j);

    pmax.set_block(e, e, kron(params.Q1, params.Q2));
    pmax.set_block(e, e + ss, kron(Matrix::col_vector(params.exit1()), params.Q2));
    pmax.set_block(e, e + ss + s, kron(params.Q1, Matrix::col_vector(params.exit2())));
    pmax.set_block(e + ss, e + ss, params.Q2);
    pmax.set_block(e + ss + s, e + ss + s, params.Q1);

    chain.pmax = std::move(pmax);
    return chain;
}

DphParams max_dph(const CdphParams& params) {
    CoupledChainParams chain = build_coupled_chain(params);
    return DphParams(std::move(chain.init), std::move(chain.pmax));
}

DphParams min_dph(const CdphParams& params) {
    const std::size_t e = params.dim_e();
    const std::size_t s = params.dim_s();
    const std::size_t n = e + s * s;

    Vec init(n, 0.0);
    std::copy(params.alpha.begin(), params.alpha.end(), init.begin());

    Matrix pmin(n, n, 0.0);
    pmin.set_block(0, 0, params.P);
    for (std::size_t i = 0; i < e; ++i)
        for (std::size_t j = 0; j < s; ++j) pmin(i, e + j * s + j) = params.U(i, j);
    pmin.set_block(e, e, kron(params.Q1, params.Q2));
    return DphParams(std::move(init), std::move(pmin));
}

DphParams sum_dph(const CdphParams& params) {
    const CoupledChainParams chain = build_coupled_chain(params);
    const std::size_t two_step = chain.dim_e + chain.dim_s * chain.dim_s; // states worth 2 steps
    const std::size_t one_step = 2 * chain.dim_s;
    const std::size_t n = 2 * two_step + one_step;

    // layout: [entry copies | pass-through copies | single-coordinate states]
    auto entry_of = [&](std::size_t i) { return i; };
    auto pass_of = [&](std::size_t i) { return two_step + i; };
    auto single_of = [&](std::size_t u) { return 2 * two_step + u; };

    Matrix trans(n, n, 0.0);
    for (std::size_t i = 0; i < two_step; ++i) {
        trans(entry_of(i), pass_of(i)) = 1.0;
        for (std::size_t j = 0; j < two_step; ++j)
            trans(pass_of(i), entry_of(j)) = chain.pmax(i, j);
        for (std::size_t u = 0; u < one_step; ++u)
            trans(pass_of(i), single_of(u)) = chain.pmax(i, two_step + u);
    }
    for (std::size_t u = 0; u < one_step; ++u)
        for (std::size_t v = 0; v < one_step; ++v)
            trans(single_of(u), single_of(v)) = chain.pmax(two_step + u, two_step + v);

    Vec init(n, 0.0);
    for (std::size_t i = 0; i < two_step; ++i) init[entry_of(i)] = chain.init[i];
    return DphParams(std::move(init), std::move(trans));
}

CdphParams mixture(const std::vector<std::pair<double, CdphParams>>& components) {
    if (components.empty()) throw ValidationError("mixture: no components");
    double weight_sum = 0.0;
    for (const auto& [w, c] : components) {
        if (!(w > 0.0)) throw ValidationError("mixture: weights must be positive");
        weight_sum += w;
        if (!(c.shift == components.front().second.shift))
            throw ValidationError("mixture: components must share one shift");
    }
    if (std::abs(weight_sum - 1.0) > tol::row_sum_slack)
        throw ValidationError("mixture: weights must sum to 1");

    std::size_t e_total = 0, s_total = 0;
    for (const auto& [w, c] : components) {
        e_total += c.dim_e();
        s_total += c.dim_s();
    }

    Vec alpha(e_total, 0.0);
    Matrix p(e_total, e_total, 0.0);
    Matrix u(e_total, s_total, 0.0);
    Matrix q1(s_total, s_total, 0.0);
    Matrix q2(s_total, s_total, 0.0);

    std::size_t e_off = 0, s_off = 0;
    for (const auto& [w, c] : components) {
        for (std::size_t i = 0; i < c.dim_e(); ++i) alpha[e_off + i] = w * c.alpha[i];
        p.set_block(e_off, e_off, c.P);
        u.set_block(e_off, s_off, c.U);
        q1.set_block(s_off, s_off, c.Q1);
        q2.set_block(s_off, s_off, c.Q2);
        e_off += c.dim_e();
        s_off += c.dim_s();
    }
    return CdphParams(std::move(alpha), std::move(p), std::move(u), std::move(q1), std::move(q2),
                      components.front().second.shift);
}

CdphParams sum_of_vectors(const CdphParams& a, const CdphParams& b) {
    if (!(a.shift == Shift{}) || !(b.shift == Shift{}))
        throw ValidationError("sum_of_vectors: both inputs must carry the default shift");

    const std::size_t e1 = a.dim_e(), s1 = a.dim_s();
    const std::size_t e2 = b.dim_e(), s2 = b.dim_s();
    const std::size_t e_sum = e1 + s1 * e2;       // E(a) u (S(a) x E(b))
    const std::size_t s_sum = s1 * s2 + s2;       // (S(a) x S(b)) u S(b)

    Vec alpha(e_sum, 0.0);
    std::copy(a.alpha.begin(), a.alpha.end(), alpha.begin());

    Matrix p(e_sum, e_sum, 0.0);
    p.set_block(0, 0, a.P);
    p.set_block(0, e1, kron(a.U, Matrix::row_vector(b.alpha)));
    p.set_block(e1, e1, kron(Matrix::identity(s1), b.P));

    Matrix u(e_sum, s_sum, 0.0);
    u.set_block(e1, 0, kron(Matrix::identity(s1), b.U));

    // Both coordinates run their own clock through S(a) while the S(b)
    // memory stays fixed, then continue through S(b); the shared s1-major
    // flattening of S(a) x S(b) puts the evolving factor first.
    Matrix q1(s_sum, s_sum, 0.0);
    q1.set_block(0, 0, kron(a.Q1, Matrix::identity(s2)));
    q1.set_block(0, s1 * s2, kron(Matrix::col_vector(a.exit1()), Matrix::identity(s2)));
    q1.set_block(s1 * s2, s1 * s2, b.Q1);

    Matrix q2(s_sum, s_sum, 0.0);
    q2.set_block(0, 0, kron(a.Q2, Matrix::identity(s2)));
    q2.set_block(0, s1 * s2, kron(Matrix::col_vector(a.exit2()), Matrix::identity(s2)));
    q2.set_block(s1 * s2, s1 * s2, b.Q2);

    return CdphParams(std::move(alpha), std::move(p), std::move(u), std::move(q1), std::move(q2));
}

} // namespace cdph
