// SPDX-License-Identifier: Apache-2.0
//
// Closed-form diversity-multiplexing tradeoff curves of the cooperative
// relay protocols, and the optimal phase-ratio selectors of the
// variable-ratio selection decode-and-forward protocols.
//
// Symbols used throughout: n nodes on the transmit side (source plus n-1
// relays), p broadcast-phase uses, q relaying-phase uses, m = p + q and
// kappa = p / q.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dmt/core.hpp"
#include "dmt/curve.hpp"

namespace dmt {

/// Phase lengths as reals. Every fixed-ratio curve depends on (p, q) only
/// through kappa, so a real split {kappa, 1} evaluates the tradeoff at an
/// irrational ratio that no integer frame can realize.
struct PhaseSplit {
    double p;
    double q;

    double m() const noexcept { return p + q; }
    double kappa() const noexcept { return p / q; }

    static PhaseSplit from_integers(int p, int q)
    {
        if (p < 1 || q < 1)
            throw std::invalid_argument("phase lengths must be positive");
        if (p < q)
            throw std::invalid_argument("only p >= q is supported (got p=" + std::to_string(p) + ", q=" + std::to_string(q) + ")");
        return {static_cast<double>(p), static_cast<double>(q)};
    }

    static PhaseSplit from_kappa(double kappa)
    {
        if (!(kappa >= 1.0) || !std::isfinite(kappa))
            throw std::invalid_argument("kappa must be a finite value >= 1");
        return {kappa, 1.0};
    }
};

namespace detail {

inline void require_n(int n)
{
    if (n < 2)
        throw std::invalid_argument("need at least one relay (n >= 2), got n=" + std::to_string(n));
}

inline double pos(double x) noexcept { return x > 0.0 ? x : 0.0; }

} // namespace detail

/// MISO benchmark d(r) = n(1 - r).
inline PiecewiseLinearCurve transmit_diversity_bound(int n)
{
    if (n < 1)
        throw std::invalid_argument("n must be >= 1");
    return PiecewiseLinearCurve({{0.0, static_cast<double>(n)}, {1.0, 0.0}});
}

/// Upper bound on the tradeoff of every orthogonal amplify-and-forward
/// protocol with frame (p, q), whatever relay transforms are used. q = 0 is
/// the non-cooperative link.
inline PiecewiseLinearCurve oaf_upper_bound(int n, int p, int q)
{
    detail::require_n(n);
    if (p < 1 || q < 0)
        throw std::invalid_argument("oaf_upper_bound: need p >= 1, q >= 0");
    if (q == 0)
        return PiecewiseLinearCurve({{0.0, 1.0}, {1.0, 0.0}});

    const double nd = n, pd = p, qd = q, m = p + q;
    // p/m >= n/(2n-1), decided in integers.
    if (static_cast<long long>(p) * (2 * n - 1) >= static_cast<long long>(n) * (p + q)) {
        const double r1 = qd / m;
        return PiecewiseLinearCurve::from_knots(
            [=](double r) {
                if (r <= r1)
                    return nd * (1.0 - (nd - 1.0) * m * r / (nd * qd));
                if (r <= 0.5)
                    return pd / (pd - qd) * (1.0 - m * r / pd);
                return 1.0 - r;
            },
            {r1, 0.5});
    }
    // Cooperative branch n(1 - mr/p) meets (1 - r) here.
    const double r1 = (nd - 1.0) * pd / (nd * m - pd);
    return PiecewiseLinearCurve::from_knots(
        [=](double r) { return r <= r1 ? nd * (1.0 - m * r / pd) : 1.0 - r; }, {r1});
}

/// Best OAF tradeoff, reached by p = n, q = n - 1 with single-entry relay
/// matrices: n - (2n-1) r up to r = 1/2, then the direct link's 1 - r.
inline PiecewiseLinearCurve oaf_optimal_dmt(int n)
{
    detail::require_n(n);
    const double nd = n;
    return PiecewiseLinearCurve::from_knots(
        [=](double r) { return r <= 0.5 ? nd - (2.0 * nd - 1.0) * r : 1.0 - r; }, {0.5});
}

/// Non-orthogonal amplify-and-forward: (1-r)+ + (n-1)(1-2r)+.
inline PiecewiseLinearCurve naf_dmt(int n)
{
    detail::require_n(n);
    const double nd = n;
    return PiecewiseLinearCurve::from_knots(
        [=](double r) { return detail::pos(1.0 - r) + (nd - 1.0) * detail::pos(1.0 - 2.0 * r); }, {0.5});
}

/// Critical ratio of the non-orthogonal selection-DF protocol: positive root
/// of (n-1) k^2 - k - (n-1) = 0. The golden ratio for n = 2.
inline double nsdf_kappa_n(int n)
{
    detail::require_n(n);
    const double a = n - 1.0;
    return (1.0 + std::sqrt(1.0 + 4.0 * a * a)) / (2.0 * a);
}

/// Critical ratio of the orthogonal selection-DF protocol, n / (n-1).
inline double osdf_kappa_n(int n)
{
    detail::require_n(n);
    return static_cast<double>(n) / (n - 1.0);
}

/// Outage exponent d_k(r) of the NSDF channel when k-1 relays take part in
/// the relaying phase. k = 1 is the direct link alone.
inline PiecewiseLinearCurve nsdf_conditional_exponent(int k, const PhaseSplit& s)
{
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    if (s.p < s.q)
        throw std::invalid_argument("only p >= q is supported");
    if (k == 1)
        return PiecewiseLinearCurve({{0.0, 1.0}, {1.0, 0.0}});
    const double kd = k, m = s.m(), r1 = s.q / m;
    return PiecewiseLinearCurve::from_knots(
        [=](double r) { return r <= r1 ? kd - (kd - 1.0) * m * r / s.q : m / s.p * (1.0 - r); }, {r1});
}

inline PiecewiseLinearCurve nsdf_conditional_exponent(int k, int p, int q)
{
    return nsdf_conditional_exponent(k, PhaseSplit::from_integers(p, q));
}

/// Negative SNR exponent of Pr(exactly k-1 relays decode). +infinity when
/// the event is asymptotically impossible (some relay decodes although the
/// rate exceeds what the broadcast phase carries).
inline ExtendedReal participation_exponent(int n, int k, const PhaseSplit& s, double r)
{
    if (k < 1 || k > n)
        throw std::invalid_argument("participation_exponent: need 1 <= k <= n");
    const double m = s.m();
    if (r <= s.p / m)
        return (n - k) * detail::pos(1.0 - m * r / s.p);
    return k == 1 ? ExtendedReal(0.0) : ExtendedReal::infinity();
}

inline ExtendedReal participation_exponent(int n, int k, int p, int q, double r)
{
    return participation_exponent(n, k, PhaseSplit::from_integers(p, q), r);
}

/// The "no relay helps" term (n-1)(1 - mr/p)+ + (1-r)+.
inline PiecewiseLinearCurve nsdf_no_relay_term(int n, const PhaseSplit& s)
{
    detail::require_n(n);
    const double nd = n, m = s.m(), r1 = s.p / m;
    return PiecewiseLinearCurve::from_knots(
        [=](double r) { return (nd - 1.0) * detail::pos(1.0 - m * r / s.p) + detail::pos(1.0 - r); }, {r1});
}

/// The "all relays help" term, which is d_n(r) for p >= q.
inline PiecewiseLinearCurve nsdf_all_relay_term(int n, const PhaseSplit& s)
{
    return nsdf_conditional_exponent(n, s);
}

namespace detail {

// Low-ratio form, kappa <= kappa_n: the no-relay term written out per branch.
inline PiecewiseLinearCurve nsdf_fixed_low(int n, const PhaseSplit& s)
{
    const double nd = n, p = s.p, m = s.m(), r1 = p / m;
    return PiecewiseLinearCurve::from_knots(
        [=](double r) { return r <= r1 ? nd * (1.0 - ((nd - 1.0) * m + p) * r / (nd * p)) : 1.0 - r; }, {r1});
}

// Four-branch form, kappa >= kappa_n.
inline PiecewiseLinearCurve nsdf_fixed_high(int n, const PhaseSplit& s)
{
    const double nd = n, p = s.p, q = s.q, m = s.m();
    const double r1 = q / m;
    const double r2 = (nd * p - m) / ((nd - 2.0) * m + p);
    const double r3 = p / m;
    return PiecewiseLinearCurve::from_knots(
        [=](double r) {
            if (r <= r1)
                return nd * (1.0 - m * (nd - 1.0) * r / (nd * q));
            if (r <= r2)
                return m / p * (1.0 - r);
            if (r <= r3)
                return nd * (1.0 - ((nd - 1.0) * m + p) * r / (nd * p));
            return 1.0 - r;
        },
        {r1, r2, r3});
}

} // namespace detail

/// Fixed-ratio NSDF tradeoff. Built as min{no-relay term, all-relay term}
/// and cross-checked against the published piecewise forms.
inline PiecewiseLinearCurve nsdf_fixed_dmt(int n, const PhaseSplit& s)
{
    detail::require_n(n);
    if (s.p < s.q)
        throw std::invalid_argument("only p >= q is supported");
    const auto composed = pointwise_min(nsdf_no_relay_term(n, s), nsdf_all_relay_term(n, s));

    const double kn = nsdf_kappa_n(n);
    const double kappa = s.kappa();
    auto check = [&](const PiecewiseLinearCurve& published) {
        if (max_abs_difference(composed, published) > 1e-9)
            throw std::logic_error("nsdf_fixed_dmt: composed curve disagrees with the piecewise form");
    };
    if (std::abs(kappa - kn) <= kCurveTol) {
        check(detail::nsdf_fixed_low(n, s));
        check(detail::nsdf_fixed_high(n, s));
    } else if (kappa < kn) {
        check(detail::nsdf_fixed_low(n, s));
    } else {
        check(detail::nsdf_fixed_high(n, s));
    }
    return composed.simplified();
}

inline PiecewiseLinearCurve nsdf_fixed_dmt(int n, int p, int q)
{
    return nsdf_fixed_dmt(n, PhaseSplit::from_integers(p, q));
}

/// Where the no-relay and all-relay terms cross (kappa >= kappa_n).
inline Breakpoint nsdf_intersection(int n, const PhaseSplit& s)
{
    const double nd = n, m = s.m();
    const double r = (nd * s.p - m) / ((nd - 2.0) * m + s.p);
    return {r, m / s.p * (1.0 - r)};
}

/// Variable-ratio NSDF tradeoff at a single r.
inline double nsdf_variable_value(int n, double r)
{
    detail::require_n(n);
    if (!(r >= 0.0 && r <= 1.0))
        throw std::domain_error("r outside [0, 1]");
    const double nd = n, kn = nsdf_kappa_n(n);
    if (r <= 1.0 / (kn + 1.0))
        return nd * (1.0 - (nd - 1.0) * (kn + 1.0) * r / nd);
    return (nd - r) * (1.0 - r) / ((nd - 2.0) * r + 1.0);
}

/// Variable-ratio NSDF tradeoff. The second branch is not linear in r, so
/// it is sampled on `segments` uniform intervals plus the branch point.
/// Values at grid points and at the branch point are exact.
inline PiecewiseLinearCurve nsdf_variable_dmt(int n, int segments = 1000)
{
    const double r0 = 1.0 / (nsdf_kappa_n(n) + 1.0);
    return PiecewiseLinearCurve::from_knots([n](double r) { return nsdf_variable_value(n, r); },
                                            PiecewiseLinearCurve::grid(segments, {r0}));
}

/// Phase ratio that maximizes the NSDF tradeoff at r; +infinity at r = 1.
inline ExtendedReal nsdf_optimal_kappa(int n, double r)
{
    detail::require_n(n);
    if (!(r >= 0.0 && r <= 1.0))
        throw std::domain_error("r outside [0, 1]");
    const double kn = nsdf_kappa_n(n);
    if (r <= 1.0 / (kn + 1.0))
        return kn;
    if (r == 1.0)
        return ExtendedReal::infinity();
    return (1.0 + (n - 2.0) * r) / ((n - 1.0) * (1.0 - r));
}

/// Fixed-ratio orthogonal selection-DF tradeoff.
inline PiecewiseLinearCurve osdf_fixed_dmt(int n, const PhaseSplit& s)
{
    detail::require_n(n);
    if (s.p < s.q)
        throw std::invalid_argument("only p >= q is supported");
    const double nd = n, p = s.p, q = s.q, m = s.m();
    const double r_direct = (nd - 1.0) * p / (nd * m - p);
    if (s.kappa() <= osdf_kappa_n(n)) {
        return PiecewiseLinearCurve::from_knots(
            [=](double r) { return r <= r_direct ? nd * (1.0 - m * r / p) : 1.0 - r; }, {r_direct});
    }
    const double r1 = q / m;
    const double r2 = (nd * p - m) / (m * (nd - 1.0));
    return PiecewiseLinearCurve::from_knots(
        [=](double r) {
            if (r <= r1)
                return nd * (1.0 - m * (nd - 1.0) * r / (nd * q));
            if (r <= r2)
                return m / p * (1.0 - r);
            if (r <= r_direct)
                return nd * (1.0 - m * r / p);
            return 1.0 - r;
        },
        {r1, r2, r_direct});
}

inline PiecewiseLinearCurve osdf_fixed_dmt(int n, int p, int q)
{
    return osdf_fixed_dmt(n, PhaseSplit::from_integers(p, q));
}

inline double osdf_variable_value(int n, double r)
{
    detail::require_n(n);
    if (!(r >= 0.0 && r <= 1.0))
        throw std::domain_error("r outside [0, 1]");
    const double nd = n, kn = osdf_kappa_n(n);
    if (r <= 1.0 / (kn + 1.0))
        return nd * (1.0 - (nd - 1.0) * (kn + 1.0) * r / nd);
    return nd * (1.0 - r) / ((nd - 1.0) * r + 1.0);
}

inline PiecewiseLinearCurve osdf_variable_dmt(int n, int segments = 1000)
{
    const double r0 = 1.0 / (osdf_kappa_n(n) + 1.0);
    return PiecewiseLinearCurve::from_knots([n](double r) { return osdf_variable_value(n, r); },
                                            PiecewiseLinearCurve::grid(segments, {r0}));
}

inline ExtendedReal osdf_optimal_kappa(int n, double r)
{
    detail::require_n(n);
    if (!(r >= 0.0 && r <= 1.0))
        throw std::domain_error("r outside [0, 1]");
    const double kn = osdf_kappa_n(n);
    if (r <= 1.0 / (kn + 1.0))
        return kn;
    if (r == 1.0)
        return ExtendedReal::infinity();
    return (1.0 + (n - 1.0) * r) / ((n - 1.0) * (1.0 - r));
}

/// Tradeoff curve for any protocol spec. OAF with the default frame uses
/// the optimal curve; other (p, q) give the class upper bound.
inline PiecewiseLinearCurve dmt_curve(const ProtocolSpec& spec)
{
    spec.validate();
    switch (spec.kind) {
    case ProtocolKind::Oaf:
        if (spec.p == spec.n && spec.q == spec.n - 1)
            return oaf_optimal_dmt(spec.n);
        return oaf_upper_bound(spec.n, spec.p, spec.q);
    case ProtocolKind::NsdfFixed: return nsdf_fixed_dmt(spec.n, spec.p, spec.q);
    case ProtocolKind::NsdfVariable: return nsdf_variable_dmt(spec.n);
    case ProtocolKind::OsdfFixed: return osdf_fixed_dmt(spec.n, spec.p, spec.q);
    case ProtocolKind::OsdfVariable: return osdf_variable_dmt(spec.n);
    case ProtocolKind::Naf: return naf_dmt(spec.n);
    case ProtocolKind::Miso: return transmit_diversity_bound(spec.n);
    }
    throw std::logic_error("unhandled protocol");
}

} // namespace dmt
