// SPDX-License-Identifier: Apache-2.0
//
// Closed-form tradeoff curves checked against the optimization oracle.

#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "dmt/analytic.hpp"
#include "dmt/numeric.hpp"

namespace dmt {

struct VerifyCase {
    ProtocolKind kind;
    int n;
    int p;
    int q;
};

struct VerifyResult {
    VerifyCase worst_case{ProtocolKind::Oaf, 2, 1, 1};
    double worst_r = 0.0;
    double analytic = 0.0;
    double oracle = 0.0;
    double max_gap = 0.0;
    std::size_t cases = 0;
    /// Where the no-relay and all-relay NSDF terms cross, for NSDF cases
    /// whose ratio is at least the critical one (last such case).
    std::optional<Breakpoint> intersection;
};

inline std::vector<std::pair<int, int>> default_frames(int n)
{
    return {{1, 1}, {2, 1}, {3, 1}, {3, 2}, {5, 3}, {n, n - 1}};
}

inline std::vector<VerifyCase> default_verify_cases(const std::vector<int>& ns = {2, 3, 4})
{
    std::vector<VerifyCase> out;
    for (int n : ns)
        for (auto [p, q] : default_frames(n))
            for (auto kind : {ProtocolKind::Oaf, ProtocolKind::NsdfFixed, ProtocolKind::OsdfFixed})
                out.push_back({kind, n, p, q});
    return out;
}

inline PiecewiseLinearCurve analytic_fixed_curve(const VerifyCase& c)
{
    switch (c.kind) {
    case ProtocolKind::Oaf: return oaf_upper_bound(c.n, c.p, c.q);
    case ProtocolKind::NsdfFixed: return nsdf_fixed_dmt(c.n, c.p, c.q);
    case ProtocolKind::OsdfFixed: return osdf_fixed_dmt(c.n, c.p, c.q);
    default: throw std::invalid_argument("verification covers oaf, nsdf-fixed and osdf-fixed");
    }
}

inline PiecewiseLinearCurve oracle_curve(const VerifyCase& c)
{
    switch (c.kind) {
    case ProtocolKind::Oaf: return oracle_oaf_curve(c.n, c.p, c.q);
    case ProtocolKind::NsdfFixed: return oracle_nsdf_curve(c.n, c.p, c.q);
    case ProtocolKind::OsdfFixed: return oracle_osdf_curve(c.n, c.p, c.q);
    default: throw std::invalid_argument("verification covers oaf, nsdf-fixed and osdf-fixed");
    }
}

/// Max |analytic - oracle| over `samples` evenly spaced r in [0, 1] for
/// every case. `perturb` is added to every analytic value, as a fault
/// injection for the checker itself.
inline VerifyResult verify_curves(const std::vector<VerifyCase>& cases, int samples = 101, double perturb = 0.0)
{
    if (samples < 2)
        throw std::invalid_argument("need at least 2 r-samples");
    VerifyResult res;
    res.max_gap = -1.0;
    for (const auto& c : cases) {
        ProtocolSpec{c.kind, c.n, c.p, c.q}.validate();
        const auto a = analytic_fixed_curve(c);
        const auto o = oracle_curve(c);
        for (int i = 0; i < samples; ++i) {
            const double r = static_cast<double>(i) / (samples - 1);
            const double av = a.eval(r) + perturb, ov = o.eval(r);
            const double gap = std::abs(av - ov);
            if (gap > res.max_gap) {
                res.max_gap = gap;
                res.worst_case = c;
                res.worst_r = r;
                res.analytic = av;
                res.oracle = ov;
            }
        }
        if (c.kind == ProtocolKind::NsdfFixed && static_cast<double>(c.p) / c.q >= nsdf_kappa_n(c.n) - 1e-12)
            res.intersection = nsdf_intersection(c.n, PhaseSplit::from_integers(c.p, c.q));
        ++res.cases;
    }
    return res;
}

} // namespace dmt
