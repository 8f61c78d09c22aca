// SPDX-License-Identifier: Apache-2.0
//
// Piecewise-linear curves d(r) on [0, 1].

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <stdexcept>
#include <vector>

#include "dmt/core.hpp"

namespace dmt {

struct Breakpoint {
    double r;
    double d;
};

/// A continuous piecewise-linear function on [0, 1], stored as its
/// breakpoints. Values are clamped to be non-negative on construction.
///
/// Breakpoints that are rational in the protocol parameters are computed by
/// exact integer-ratio arithmetic and land on the same double every time;
/// irrational ones are compared with kCurveTol.
class PiecewiseLinearCurve {
public:
    PiecewiseLinearCurve() : pts_{{0.0, 0.0}, {1.0, 0.0}} {}

    explicit PiecewiseLinearCurve(std::vector<Breakpoint> pts) : pts_(std::move(pts))
    {
        if (pts_.size() < 2)
            throw std::invalid_argument("curve needs at least two breakpoints");
        if (pts_.front().r != 0.0 || pts_.back().r != 1.0)
            throw std::invalid_argument("curve must span exactly [0, 1]");
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            if (!std::isfinite(pts_[i].d))
                throw std::invalid_argument("curve value is not finite");
            if (i > 0 && !(pts_[i].r > pts_[i - 1].r))
                throw std::invalid_argument("curve abscissas must be strictly increasing");
            pts_[i].d = std::max(pts_[i].d, 0.0);
        }
    }

    /// Samples `f` at the given knots (clamped to [0, 1], sorted, with
    /// near-duplicates merged). Endpoints are always included. Exact when
    /// every kink of `f` is a knot.
    template <class F>
    static PiecewiseLinearCurve from_knots(F&& f, std::vector<double> knots)
    {
        knots.push_back(0.0);
        knots.push_back(1.0);
        for (auto& k : knots)
            k = std::clamp(k, 0.0, 1.0);
        std::sort(knots.begin(), knots.end());
        std::vector<Breakpoint> pts;
        pts.reserve(knots.size());
        for (double k : knots) {
            if (!pts.empty() && k - pts.back().r <= kCurveTol)
                continue;
            pts.push_back({k, 0.0});
        }
        // Snap the last kept knot to exactly 1.
        if (pts.back().r != 1.0) {
            if (pts.size() > 1 && 1.0 - pts.back().r <= kCurveTol)
                pts.back().r = 1.0;
            else
                pts.push_back({1.0, 0.0});
        }
        for (auto& bp : pts)
            bp.d = f(bp.r);
        return PiecewiseLinearCurve(std::move(pts));
    }

    /// Uniform grid of `segments` intervals plus any extra knots. Zero
    /// segments gives just the endpoints and the extras.
    static std::vector<double> grid(int segments, std::vector<double> extra = {})
    {
        if (segments <= 0) {
            extra.push_back(0.0);
            extra.push_back(1.0);
            return extra;
        }
        for (int i = 0; i <= segments; ++i)
            extra.push_back(static_cast<double>(i) / segments);
        return extra;
    }

    const std::vector<Breakpoint>& breakpoints() const noexcept { return pts_; }

    double operator()(double r) const { return eval(r); }

    double eval(double r) const
    {
        if (!(r >= 0.0 && r <= 1.0))
            throw std::domain_error("curve evaluated outside [0, 1]");
        auto it = std::upper_bound(pts_.begin(), pts_.end(), r, [](double x, const Breakpoint& b) { return x < b.r; });
        if (it == pts_.end())
            return pts_.back().d;
        const auto& hi = *it;
        const auto& lo = *std::prev(it);
        if (r == lo.r)
            return lo.d;
        const double t = (r - lo.r) / (hi.r - lo.r);
        return lo.d + t * (hi.d - lo.d);
    }

    double eval(MultiplexingGain r) const { return eval(r.value()); }

    /// Drops interior breakpoints that lie on the line through their
    /// neighbours (within `tol` in d).
    PiecewiseLinearCurve simplified(double tol = 1e-12) const
    {
        std::vector<Breakpoint> out{pts_.front()};
        for (std::size_t i = 1; i + 1 < pts_.size(); ++i) {
            const auto& a = out.back();
            const auto& b = pts_[i];
            const auto& c = pts_[i + 1];
            const double on_line = a.d + (c.d - a.d) * (b.r - a.r) / (c.r - a.r);
            if (std::abs(on_line - b.d) > tol)
                out.push_back(b);
        }
        out.push_back(pts_.back());
        return PiecewiseLinearCurve(std::move(out));
    }

    bool is_non_increasing(double tol = kCurveTol) const noexcept
    {
        for (std::size_t i = 1; i < pts_.size(); ++i)
            if (pts_[i].d > pts_[i - 1].d + tol)
                return false;
        return true;
    }

private:
    std::vector<Breakpoint> pts_;
};

namespace detail {

inline std::vector<double> merged_abscissas(const PiecewiseLinearCurve& a, const PiecewiseLinearCurve& b)
{
    std::vector<double> xs;
    xs.reserve(a.breakpoints().size() + b.breakpoints().size());
    for (const auto& bp : a.breakpoints())
        xs.push_back(bp.r);
    for (const auto& bp : b.breakpoints())
        xs.push_back(bp.r);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

// Pointwise combination with exact crossings. On every interval between
// merged abscissas both inputs are affine, so the sign of (a - b) changes
// at most once and the crossing is the root of that affine difference.
template <class Pick>
PiecewiseLinearCurve combine(const PiecewiseLinearCurve& a, const PiecewiseLinearCurve& b, Pick pick)
{
    const auto xs = merged_abscissas(a, b);
    std::vector<Breakpoint> out;
    out.reserve(xs.size() * 2);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const double da = a.eval(x), db = b.eval(x);
        if (i > 0) {
            const double x0 = xs[i - 1];
            const double diff0 = a.eval(x0) - b.eval(x0);
            const double diff1 = da - db;
            if ((diff0 < 0.0 && diff1 > 0.0) || (diff0 > 0.0 && diff1 < 0.0)) {
                const double xc = x0 + (x - x0) * diff0 / (diff0 - diff1);
                if (xc - out.back().r > kCurveTol && x - xc > kCurveTol)
                    out.push_back({xc, pick(a.eval(xc), b.eval(xc))});
            }
        }
        out.push_back({x, pick(da, db)});
    }
    return PiecewiseLinearCurve(std::move(out));
}

} // namespace detail

/// Exact pointwise minimum, with crossing abscissas inserted.
inline PiecewiseLinearCurve pointwise_min(const PiecewiseLinearCurve& a, const PiecewiseLinearCurve& b)
{
    return detail::combine(a, b, [](double x, double y) { return std::min(x, y); });
}

/// Exact pointwise maximum, with crossing abscissas inserted.
inline PiecewiseLinearCurve pointwise_max(const PiecewiseLinearCurve& a, const PiecewiseLinearCurve& b)
{
    return detail::combine(a, b, [](double x, double y) { return std::max(x, y); });
}

/// sup over [0, 1] of |a - b|. Exact for piecewise-linear inputs, since the
/// difference is affine between merged breakpoints.
inline double max_abs_difference(const PiecewiseLinearCurve& a, const PiecewiseLinearCurve& b)
{
    double worst = 0.0;
    for (double x : detail::merged_abscissas(a, b))
        worst = std::max(worst, std::abs(a.eval(x) - b.eval(x)));
    return worst;
}

} // namespace dmt
