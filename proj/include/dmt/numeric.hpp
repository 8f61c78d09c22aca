// SPDX-License-Identifier: Apache-2.0
//
// Optimization oracle for outage exponents. Re-derives the tradeoff curves
// by solving the underlying infimum problems over the exponent box instead
// of using the closed forms in analytic.hpp.
//
// Every problem handled here has the shape
//
//     minimize    c0 u + sum_j c_j v_j
//     subject to  a0 u + sum_j (a_j min{u, v_j} + b_j v_j) >= alpha - beta r
//                 0 <= u, v_j <= 1
//
// where u is the exponent of the source-destination gain and v_j are relay
// exponents. Strict inequalities in the outage events are replaced by their
// closures; the objective is continuous, so the infimum is unchanged.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dmt/analytic.hpp"
#include "dmt/core.hpp"
#include "dmt/curve.hpp"

namespace dmt {

struct RelayExponentTerm {
    double min_weight = 0.0;    // a_j, multiplies min{u, v_j}
    double linear_weight = 0.0; // b_j, multiplies v_j
    double cost = 0.0;          // c_j, objective weight
};

struct InfimumProblem {
    double source_weight = 0.0; // a0
    double source_cost = 1.0;   // c0
    std::vector<RelayExponentTerm> relays;
    double rhs_const = 0.0; // alpha
    double rhs_slope = 0.0; // beta

    double rhs(double r) const noexcept { return rhs_const - rhs_slope * r; }
    std::size_t dims() const noexcept { return 1 + relays.size(); }

    void validate() const
    {
        if (source_cost < 0.0)
            throw std::invalid_argument("InfimumProblem: negative source cost");
        for (const auto& t : relays)
            if (t.min_weight < 0.0 || t.linear_weight < 0.0 || t.cost < 0.0)
                throw std::invalid_argument("InfimumProblem: relay weights and costs must be non-negative");
    }
};

struct InfimumSolution {
    double value = 0.0;
    double u = 0.0;
    std::vector<double> v;
    bool feasible = false;
};

// ---------------------------------------------------------------------------
// Problem builders

/// Outage of any OAF protocol with frame (p, q) after collapsing the relay
/// exponents to v = min v_j: (p-q) u + q min{u, v} >= p - m r, cost u + (n-1) v.
inline InfimumProblem oaf_bound_problem(int n, int p, int q)
{
    InfimumProblem P;
    P.source_weight = p - q;
    P.relays = {{static_cast<double>(q), 0.0, n - 1.0}};
    P.rhs_const = p;
    P.rhs_slope = p + q;
    return P;
}

/// Outage of the p = n, q = n-1 OAF protocol with single-entry relay
/// matrices, one exponent per relay: u + sum min{u, v_j} >= n - (2n-1) r.
inline InfimumProblem oaf_protocol_problem(int n)
{
    InfimumProblem P;
    P.source_weight = 1.0;
    P.relays.assign(static_cast<std::size_t>(n - 1), {1.0, 0.0, 1.0});
    P.rhs_const = n;
    P.rhs_slope = 2.0 * n - 1.0;
    return P;
}

/// NSDF outage given k-1 decoding relays: p u + q min{u, v} >= m (1 - r),
/// cost u + (k-1) v. With k = 1 the relay exponent is free.
inline InfimumProblem nsdf_conditional_problem(int k, const PhaseSplit& s)
{
    InfimumProblem P;
    P.source_weight = s.p;
    P.relays = {{s.q, 0.0, k - 1.0}};
    P.rhs_const = s.m();
    P.rhs_slope = s.m();
    return P;
}

/// OSDF outage given k-1 decoding relays; the source is silent in the
/// relaying phase, so the second-phase term is q v rather than q min{u, v}.
inline InfimumProblem osdf_conditional_problem(int k, const PhaseSplit& s)
{
    InfimumProblem P;
    P.source_weight = s.p;
    P.relays = {{0.0, s.q, k - 1.0}};
    P.rhs_const = s.m();
    P.rhs_slope = s.m();
    return P;
}

/// One relay failing to decode the broadcast phase: p u >= p - m r.
inline InfimumProblem relay_outage_problem(const PhaseSplit& s)
{
    InfimumProblem P;
    P.source_weight = s.p;
    P.rhs_const = s.p;
    P.rhs_slope = s.m();
    return P;
}

// ---------------------------------------------------------------------------
// Vertex enumeration

namespace detail {

// Half-space  coef . x >= bound  in the variables x = (u, v_1, ..., v_J).
struct HalfSpace {
    std::vector<double> coef;
    double bound;
};

// Solves the square system A x = b in place; false if singular.
inline bool solve_square(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double>& x)
{
    const std::size_t N = b.size();
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col]))
                piv = r;
        if (std::abs(A[piv][col]) < 1e-12)
            return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = A[r][col] / A[col][col];
            if (f == 0.0)
                continue;
            for (std::size_t c = col; c < N; ++c)
                A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(N, 0.0);
    for (std::size_t i = N; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < N; ++c)
            acc -= A[i][c] * x[c];
        x[i] = acc / A[i][i];
    }
    return true;
}

// Calls f(indices) for every size-k subset of {0..n-1}, in lexicographic order.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f)
{
    if (k > n)
        return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i)
        idx[i] = i;
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1)
            --i;
        if (i == 0)
            return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

} // namespace detail

/// Exact infimum by vertex enumeration. The region is split on which of
/// u, v_j attains each min{u, v_j}; every piece is a polytope, so its
/// minimum sits on a vertex formed by `dims()` active constraints among the
/// box faces, the diagonals u = v_j and the outage constraint. Returns the
/// smallest objective over all feasible vertices of all pieces.
///
/// An empty region (outage impossible at this r) yields value 0 with
/// `feasible == false`.
inline InfimumSolution solve_infimum(const InfimumProblem& P, double r)
{
    P.validate();
    const std::size_t J = P.relays.size();
    const std::size_t D = P.dims();
    if (J > 16)
        throw std::invalid_argument("solve_infimum: too many relay exponents");
    const double rhs = P.rhs(r);
    constexpr double kFeasTol = 1e-9;

    InfimumSolution best;
    best.value = std::numeric_limits<double>::infinity();

    std::vector<detail::HalfSpace> hs;
    for (std::uint32_t piece = 0; piece < (1u << J); ++piece) {
        hs.clear();
        for (std::size_t i = 0; i < D; ++i) {
            std::vector<double> e(D, 0.0);
            e[i] = 1.0;
            hs.push_back({e, 0.0}); // x_i >= 0
            e[i] = -1.0;
            hs.push_back({e, -1.0}); // x_i <= 1
        }
        std::vector<double> outage(D, 0.0);
        outage[0] = P.source_weight;
        for (std::size_t j = 0; j < J; ++j) {
            const auto& t = P.relays[j];
            std::vector<double> diag(D, 0.0);
            const bool relay_above = (piece >> j) & 1u; // min{u, v_j} = u
            diag[0] = relay_above ? -1.0 : 1.0;
            diag[1 + j] = relay_above ? 1.0 : -1.0;
            hs.push_back({diag, 0.0});
            if (relay_above) {
                outage[0] += t.min_weight;
                outage[1 + j] += t.linear_weight;
            } else {
                outage[1 + j] += t.min_weight + t.linear_weight;
            }
        }
        hs.push_back({outage, rhs});

        detail::for_each_subset(hs.size(), D, [&](const std::vector<std::size_t>& active) {
            std::vector<std::vector<double>> A;
            std::vector<double> b;
            A.reserve(D);
            for (auto i : active) {
                A.push_back(hs[i].coef);
                b.push_back(hs[i].bound);
            }
            std::vector<double> x;
            if (!detail::solve_square(std::move(A), std::move(b), x))
                return;
            for (const auto& h : hs) {
                double lhs = 0.0;
                for (std::size_t i = 0; i < D; ++i)
                    lhs += h.coef[i] * x[i];
                if (lhs < h.bound - kFeasTol)
                    return;
            }
            double obj = P.source_cost * x[0];
            for (std::size_t j = 0; j < J; ++j)
                obj += P.relays[j].cost * x[1 + j];
            if (obj < best.value - 1e-13) {
                best.value = obj;
                best.u = x[0];
                best.v.assign(x.begin() + 1, x.end());
                best.feasible = true;
            }
        });
    }

    if (!best.feasible)
        return InfimumSolution{0.0, 0.0, std::vector<double>(J, 0.0), false};
    best.value = std::max(best.value, 0.0);
    return best;
}

/// Brute-force check of solve_infimum: scans u over a grid of the given step
/// and, for each u, fills the remaining requirement with the cheapest relay
/// exponents first. The inner step is exact (the relay contributions are
/// concave and separable), so the result overshoots the true infimum by at
/// most source_cost * step.
inline double grid_infimum(const InfimumProblem& P, double r, double step = 1e-3)
{
    P.validate();
    const double rhs = P.rhs(r);
    const long steps = std::lround(1.0 / step);
    double best = std::numeric_limits<double>::infinity();

    struct Segment {
        double gain;     // constraint increase per unit of v
        double cost;     // objective increase per unit of v
        double capacity; // length in v
    };
    std::vector<Segment> segs;

    for (long i = 0; i <= steps; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(steps);
        double need = rhs - P.source_weight * u;
        double obj = P.source_cost * u;
        segs.clear();
        for (const auto& t : P.relays) {
            if (t.cost == 0.0) {
                need -= t.min_weight * u + t.linear_weight; // free: push v_j to 1
                continue;
            }
            if (u > 0.0 && t.min_weight + t.linear_weight > 0.0)
                segs.push_back({t.min_weight + t.linear_weight, t.cost, u});
            if (u < 1.0 && t.linear_weight > 0.0)
                segs.push_back({t.linear_weight, t.cost, 1.0 - u});
        }
        if (need > 0.0) {
            std::sort(segs.begin(), segs.end(),
                      [](const Segment& a, const Segment& b) { return a.gain * b.cost > b.gain * a.cost; });
            for (const auto& s : segs) {
                if (need <= 0.0)
                    break;
                const double take = std::min(s.capacity, need / s.gain);
                need -= take * s.gain;
                obj += take * s.cost;
            }
            if (need > 1e-12)
                continue;
        }
        best = std::min(best, obj);
    }
    return std::isfinite(best) ? std::max(best, 0.0) : 0.0;
}

// ---------------------------------------------------------------------------
// Oracle curves

namespace detail {

inline PiecewiseLinearCurve sample_problem(const InfimumProblem& P, std::vector<double> knots)
{
    return PiecewiseLinearCurve::from_knots([&](double r) { return solve_infimum(P, r).value; }, std::move(knots));
}

inline PiecewiseLinearCurve direct_link() { return PiecewiseLinearCurve({{0.0, 1.0}, {1.0, 0.0}}); }

// f on [0, at], g on [at, 1]. Both must agree at the joint.
inline PiecewiseLinearCurve splice(const PiecewiseLinearCurve& f, const PiecewiseLinearCurve& g, double at)
{
    if (at >= 1.0)
        return f;
    if (at <= 0.0)
        return g;
    const double joint = f.eval(at);
    if (std::abs(joint - g.eval(at)) > 1e-9)
        throw std::logic_error("splice: curves disagree at the joint");
    std::vector<Breakpoint> pts;
    for (const auto& bp : f.breakpoints())
        if (bp.r < at - kCurveTol)
            pts.push_back(bp);
    pts.push_back({at, joint});
    for (const auto& bp : g.breakpoints())
        if (bp.r > at + kCurveTol)
            pts.push_back(bp);
    if (pts.back().r != 1.0)
        pts.back().r = 1.0;
    return PiecewiseLinearCurve(std::move(pts));
}

inline PiecewiseLinearCurve add(const PiecewiseLinearCurve& a, double scale_b, const PiecewiseLinearCurve& b)
{
    std::vector<double> knots;
    for (const auto& bp : a.breakpoints())
        knots.push_back(bp.r);
    for (const auto& bp : b.breakpoints())
        knots.push_back(bp.r);
    return PiecewiseLinearCurve::from_knots([&](double r) { return a.eval(r) + scale_b * b.eval(r); },
                                            std::move(knots));
}

enum class SelectionVariant { NonOrthogonal, Orthogonal };

// min over k of [(n-k) * relay outage + d_k] on [0, p/m]; beyond p/m no
// relay decodes and only the k = 1 term remains.
inline PiecewiseLinearCurve selection_df_curve(int n, const PhaseSplit& s, int segments, SelectionVariant variant)
{
    const double m = s.m();
    const auto knots = PiecewiseLinearCurve::grid(segments, {s.q / m, s.p / m});
    const auto relay_out = sample_problem(relay_outage_problem(s), knots);
    auto conditional = [&](int k) {
        return variant == SelectionVariant::NonOrthogonal ? nsdf_conditional_problem(k, s) : osdf_conditional_problem(k, s);
    };

    const auto d1 = sample_problem(conditional(1), knots);
    PiecewiseLinearCurve best = add(d1, n - 1.0, relay_out);
    for (int k = 2; k <= n; ++k)
        best = pointwise_min(best, add(sample_problem(conditional(k), knots), n - k, relay_out));
    return splice(best, d1, s.p / m);
}

} // namespace detail

/// Oracle for the OAF class bound: the infimum of the collapsed outage
/// problem, or the direct link whenever that is better.
inline PiecewiseLinearCurve oracle_oaf_curve(int n, int p, int q, int segments = 100)
{
    detail::require_n(n);
    if (p < 1 || q < 0)
        throw std::invalid_argument("oracle_oaf_curve: need p >= 1, q >= 0");
    const double m = p + q;
    const auto coop =
        detail::sample_problem(oaf_bound_problem(n, p, q), PiecewiseLinearCurve::grid(segments, {q / m, p / m, 0.5}));
    return pointwise_max(coop, detail::direct_link()).simplified();
}

/// Oracle for the p = n, q = n-1 OAF protocol with one exponent per relay.
inline PiecewiseLinearCurve oracle_oaf_protocol_curve(int n, int segments = 100)
{
    detail::require_n(n);
    const auto coop = detail::sample_problem(oaf_protocol_problem(n), PiecewiseLinearCurve::grid(segments, {0.5}));
    return pointwise_max(coop, detail::direct_link()).simplified();
}

inline PiecewiseLinearCurve oracle_nsdf_curve(int n, const PhaseSplit& s, int segments = 100)
{
    detail::require_n(n);
    if (s.p < s.q)
        throw std::invalid_argument("only p >= q is supported");
    return detail::selection_df_curve(n, s, segments, detail::SelectionVariant::NonOrthogonal).simplified();
}

inline PiecewiseLinearCurve oracle_nsdf_curve(int n, int p, int q, int segments = 100)
{
    return oracle_nsdf_curve(n, PhaseSplit::from_integers(p, q), segments);
}

/// OSDF oracle; non-cooperation (source alone for all m uses) is always an
/// option, so the direct link bounds it from below.
inline PiecewiseLinearCurve oracle_osdf_curve(int n, const PhaseSplit& s, int segments = 100)
{
    detail::require_n(n);
    if (s.p < s.q)
        throw std::invalid_argument("only p >= q is supported");
    const auto coop = detail::selection_df_curve(n, s, segments, detail::SelectionVariant::Orthogonal);
    return pointwise_max(coop, detail::direct_link()).simplified();
}

inline PiecewiseLinearCurve oracle_osdf_curve(int n, int p, int q, int segments = 100)
{
    return oracle_osdf_curve(n, PhaseSplit::from_integers(p, q), segments);
}

/// Minimizing participation count k at r for the NSDF outage sum, with the
/// value of each term. Index i of `terms` is k = i + 1; +infinity marks
/// participation sets that are asymptotically impossible.
struct SelectionBreakdown {
    int argmin_k = 1;
    std::vector<ExtendedReal> terms;
};

inline SelectionBreakdown oracle_nsdf_breakdown(int n, const PhaseSplit& s, double r)
{
    SelectionBreakdown out;
    const double relay_out = solve_infimum(relay_outage_problem(s), r).value;
    const bool relays_can_decode = r <= s.p / s.m();
    ExtendedReal best = ExtendedReal::infinity();
    for (int k = 1; k <= n; ++k) {
        ExtendedReal term = ExtendedReal::infinity();
        if (k == 1 || relays_can_decode)
            term = (n - k) * relay_out + solve_infimum(nsdf_conditional_problem(k, s), r).value;
        out.terms.push_back(term);
        if (term < best) {
            best = term;
            out.argmin_k = k;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Variable-ratio envelopes

inline std::vector<double> kappa_grid(double lo, double hi, double step, std::vector<double> extra = {})
{
    if (!(lo >= 1.0) || !(hi >= lo) || !(step > 0.0))
        throw std::invalid_argument("kappa_grid: need 1 <= lo <= hi and step > 0");
    const long count = std::lround(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i)
        extra.push_back(lo + static_cast<double>(i) * step);
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    return extra;
}

inline PiecewiseLinearCurve oracle_fixed_curve(ProtocolKind kind, int n, const PhaseSplit& s, int segments)
{
    switch (kind) {
    case ProtocolKind::NsdfFixed:
    case ProtocolKind::NsdfVariable: return oracle_nsdf_curve(n, s, segments);
    case ProtocolKind::OsdfFixed:
    case ProtocolKind::OsdfVariable: return oracle_osdf_curve(n, s, segments);
    default: throw std::invalid_argument("variable-ratio envelope exists only for NSDF and OSDF");
    }
}

/// Upper envelope over the kappa grid of the oracle's fixed-ratio curves.
/// Fixed curves are built on their structural knots only; the exact
/// pointwise maximum keeps every crossing.
inline PiecewiseLinearCurve oracle_variable_envelope(ProtocolKind kind, int n, const std::vector<double>& kappas)
{
    if (kappas.empty())
        throw std::invalid_argument("empty kappa grid");
    PiecewiseLinearCurve env = oracle_fixed_curve(kind, n, PhaseSplit::from_kappa(kappas.front()), 0);
    for (std::size_t i = 1; i < kappas.size(); ++i)
        env = pointwise_max(env, oracle_fixed_curve(kind, n, PhaseSplit::from_kappa(kappas[i]), 0));
    return env.simplified();
}

struct KappaChoice {
    double kappa;
    double d;
};

/// Grid kappa maximizing the fixed-ratio oracle tradeoff at r (first on ties).
inline KappaChoice oracle_envelope_argmax(ProtocolKind kind, int n, const std::vector<double>& kappas, double r)
{
    KappaChoice best{kappas.at(0), -1.0};
    for (double kappa : kappas) {
        const double d = oracle_fixed_curve(kind, n, PhaseSplit::from_kappa(kappa), 0).eval(r);
        if (d > best.d + 1e-12)
            best = {kappa, d};
    }
    return best;
}

} // namespace dmt
