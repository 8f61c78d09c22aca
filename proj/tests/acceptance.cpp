// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Windows, seeds and tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dmt/analytic.hpp"
#include "dmt/codes.hpp"
#include "dmt/csv.hpp"
#include "dmt/numeric.hpp"
#include "dmt/outage.hpp"
#include "dmt/verify.hpp"

using namespace dmt;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what)
    {
        if (!detail.empty())
            detail += "; ";
        detail += what + (ok ? "" : " [fail]");
        pass = pass && ok;
    }
};

std::string num(double x, int decimals = 4) { return csv::fixed(x, decimals); }
std::string sci(double x) { return csv::number(x); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> grid(int points)
{
    std::vector<double> r;
    for (int i = 0; i < points; ++i)
        r.push_back(static_cast<double>(i) / (points - 1));
    return r;
}

double gap(const PiecewiseLinearCurve& a, const PiecewiseLinearCurve& b, int points)
{
    double worst = 0.0;
    for (double r : grid(points))
        worst = std::max(worst, std::abs(a.eval(r) - b.eval(r)));
    return worst;
}

// ---------------------------------------------------------------------------

Verdict analytic_vs_oracle()
{
    Verdict v;
    const auto t0 = Clock::now();
    const auto res = verify_curves(default_verify_cases({2, 3, 4}), 101);
    const double t = seconds_since(t0);
    v.check(res.max_gap < 1e-6, "max gap " + sci(res.max_gap) + " over " + std::to_string(res.cases) + " curves < 1e-6");
    v.check(t < 10.0, "runtime " + num(t, 2) + " s < 10 s");
    return v;
}

Verdict point_values()
{
    Verdict v;
    const double tol = 1e-12;
    auto at = [&](const std::string& name, double got, double want) {
        v.check(std::abs(got - want) <= tol, name + "=" + csv::number(got));
    };
    at("oaf3(0.25)", oaf_optimal_dmt(3).eval(0.25), 1.75);
    at("oaf3(0.75)", oaf_optimal_dmt(3).eval(0.75), 0.25);
    at("naf3(0.25)", naf_dmt(3).eval(0.25), 1.75);
    at("nsdf-var2(0.5)", nsdf_variable_value(2, 0.5), 0.75);
    at("nsdf-var2 curve(0.5)", nsdf_variable_dmt(2).eval(0.5), 0.75);
    at("osdf kappa(2)", osdf_kappa_n(2), 2.0);
    at("nsdf kappa(2)", nsdf_kappa_n(2), std::numbers::phi);
    return v;
}

Verdict identities()
{
    Verdict v;
    const double tol = 1e-12;
    double worst = 0.0;
    for (int n = 2; n <= 5; ++n)
        worst = std::max(worst, gap(oaf_optimal_dmt(n), naf_dmt(n), 1001));
    v.check(worst <= tol, "oaf-optimal vs naf n=2..5 gap " + sci(worst));

    worst = 0.0;
    for (int n = 2; n <= 5; ++n)
        worst = std::max(worst, gap(nsdf_fixed_dmt(n, 1, 1), naf_dmt(n), 1001));
    v.check(worst <= tol, "nsdf(1,1) vs naf n=2..5 gap " + sci(worst));

    double deficit = 0.0;
    for (int n = 2; n <= 5; ++n) {
        const auto a = nsdf_variable_dmt(n), b = osdf_variable_dmt(n);
        for (double r : grid(1001))
            deficit = std::max(deficit, b.eval(r) - a.eval(r));
    }
    v.check(deficit <= tol, "nsdf-var >= osdf-var, worst deficit " + sci(deficit));

    double excess = 0.0;
    for (int n = 2; n <= 5; ++n) {
        const auto bound = transmit_diversity_bound(n);
        std::vector<PiecewiseLinearCurve> curves{oaf_optimal_dmt(n), naf_dmt(n), nsdf_variable_dmt(n),
                                                 osdf_variable_dmt(n)};
        for (auto [p, q] : default_frames(n)) {
            curves.push_back(oaf_upper_bound(n, p, q));
            curves.push_back(nsdf_fixed_dmt(n, p, q));
            curves.push_back(osdf_fixed_dmt(n, p, q));
        }
        for (const auto& c : curves)
            for (double r : grid(1001))
                excess = std::max(excess, c.eval(r) - bound.eval(r));
    }
    v.check(excess <= tol, "all curves <= n(1-r), worst excess " + sci(excess));
    return v;
}

Verdict envelope()
{
    Verdict v;
    for (int n : {2, 3}) {
        const auto kappas = kappa_grid(1.0, 20.0, 1e-2, {nsdf_kappa_n(n)});
        const auto env = oracle_variable_envelope(ProtocolKind::NsdfVariable, n, kappas);
        const double g = gap(env, nsdf_variable_dmt(n), 1001);
        v.check(g <= 5e-3, "n=" + std::to_string(n) + " gap " + sci(g) + " <= 5e-3");
    }
    return v;
}

Verdict relay_matrices()
{
    Verdict v;
    double worst = std::numeric_limits<double>::infinity();
    std::size_t draws = 0;
    for (int n = 2; n <= 4; ++n) {
        const auto spec = ProtocolSpec::make(ProtocolKind::Oaf, n, n, n - 1);
        for (std::uint64_t t = 0; t < 10000; ++t) {
            TrialRng rng(2024, t);
            const auto ch = sample_channel(spec, rng);
            const double rho = db_to_linear(10.0 * static_cast<double>(t % 5));
            worst = std::min(worst, relay_sum_psd_margin(ch, oaf_single_entry_matrices(ch, rho)));
            ++draws;
        }
    }
    v.check(worst >= -1e-10, "min eigenvalue " + sci(worst) + " over " + std::to_string(draws) + " draws >= -1e-10");

    bool orthogonal = true;
    for (int n = 2; n <= 6; ++n) {
        const auto A = oaf_relay_matrices(n);
        for (std::size_t j = 0; j < A.size(); ++j)
            for (std::size_t k = 0; k < A.size(); ++k)
                if (j != k && !(A[j] * A[k].adjoint()).isZero(0.0))
                    orthogonal = false;
    }
    v.check(orthogonal, "A_j A_k^H = 0 exactly for n=2..6");
    return v;
}

// Fitted slope over a fixed window, with the band it must land in.
void slope_band(Verdict& v, const std::string& name, const ProtocolSpec& spec, double r, std::vector<double> snr,
                double centre, double half_width)
{
    SimulationOptions opt;
    opt.master_seed = 1;
    const auto t0 = Clock::now();
    const auto s = sweep_points(spec, MultiplexingGain(r), snr, 1000000, opt);
    std::string counts;
    for (const auto& pt : s.points)
        counts += (counts.empty() ? "" : "/") + std::to_string(pt.outage_count);
    try {
        const auto fit = estimate_exponent(s);
        v.check(std::abs(fit.slope - centre) <= half_width,
                name + " slope " + num(fit.slope, 3) + " +- " + num(fit.std_error, 3) + " in " + num(centre, 2) +
                    " +- " + num(half_width, 2) + " (" + num(snr.front(), 0) + "-" + num(snr.back(), 0) +
                    " dB, counts " + counts + ", " + num(seconds_since(t0), 1) + " s)");
    } catch (const InsufficientData&) {
        v.check(false, name + " too few outage events (counts " + counts + ")");
    }
}

Verdict monte_carlo()
{
    Verdict v;
    {
        // Single-antenna link: 1 - exp(-(2^R - 1) / rho), R = r log2 rho.
        const double r = 0.5;
        SimulationOptions opt;
        opt.master_seed = 1;
        const auto s = sweep_points(ProtocolSpec::make(ProtocolKind::Miso, 1), MultiplexingGain(r),
                                    {0.0, 5.0, 10.0, 15.0, 20.0}, 1000000, opt);
        double worst_z = 0.0;
        for (const auto& pt : s.points) {
            const double rho = pt.rho(), R = r * std::log2(rho);
            const double p = 1.0 - std::exp(-(std::exp2(R) - 1.0) / rho);
            const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(pt.trials));
            worst_z = std::max(worst_z, std::abs(pt.p_hat() - p) / sigma);
        }
        v.check(worst_z <= 3.0, "miso n=1 r=0.5 worst |z| " + num(worst_z, 2) + " <= 3");
    }
    slope_band(v, "oaf n=2 r=0.25", ProtocolSpec::make(ProtocolKind::Oaf, 2, 2, 1), 0.25, {25, 30, 35, 40, 45}, 1.25,
               0.25);
    slope_band(v, "nsdf n=2 (2,1) r=0.1", ProtocolSpec::make(ProtocolKind::NsdfFixed, 2, 2, 1), 0.1,
               {10, 15, 20, 25, 30}, 1.7, 0.3);
    slope_band(v, "naf n=2 r=0.25", ProtocolSpec::make(ProtocolKind::Naf, 2), 0.25, {25, 30, 35, 40, 45}, 1.25, 0.25);
    return v;
}

Verdict code_properties()
{
    Verdict v;
    {
        const auto c = oaf_diagonal_codebook(2, 2);
        std::size_t pairs = 0, bad = 0;
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b) {
                if (a == b)
                    continue;
                const CMatrix d = c.matrix(a) - c.matrix(b);
                const double prod = std::norm(d(0, 0)) * std::norm(d(1, 0));
                if (!(prod >= 1.0 - 1e-9))
                    ++bad;
                ++pairs;
            }
        v.check(bad == 0, "diagonal n=2 M=2: " + std::to_string(pairs) + " ordered difference pairs, " +
                              std::to_string(bad) + " with norm < 1");
    }
    {
        const auto c = naf_codebook(2, 2);
        TrialRng rng(77, 0);
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 10000; ++t) {
            const auto a = rng.below(c.size());
            auto b = rng.below(c.size() - 1);
            if (b >= a)
                ++b;
            worst = std::min(worst, std::abs((c.matrix(a) - c.matrix(b)).determinant()));
        }
        v.check(worst > 0.0, "naf 2x2 min |det| over 1e4 pairs " + num(worst, 3) + " > 0");
    }
    {
        double worst = 0.0;
        for (double rho : {1.0, 1e2, 1e4}) {
            for (const auto& c : {oaf_diagonal_codebook(2, 2, rho), oaf_diagonal_codebook(3, 2, rho),
                                  oaf_diagonal_codebook(2, 4, rho), naf_codebook(2, 2, rho)}) {
                for (std::size_t k = 0; k < c.size(); ++k)
                    worst = std::max(worst, (c.theta * c.matrix(k)).squaredNorm() / (c.T * rho) - 1.0);
            }
        }
        v.check(worst <= 1e-9, "energy cap excess " + sci(worst) + " <= 1e-9");
    }
    std::vector<double> snr;
    for (double s = 14.0; s <= 26.0; s += 2.0)
        snr.push_back(s);
    SimulationOptions opt;
    opt.master_seed = 1;
    for (int which = 0; which < 2; ++which) {
        const auto spec = which ? ProtocolSpec::make(ProtocolKind::Naf, 2) : ProtocolSpec::make(ProtocolKind::Oaf, 2, 2, 1);
        const auto code = which ? naf_codebook(2, 2) : oaf_diagonal_codebook(2, 2);
        const auto s = simulate_wer(spec, code, snr, 100000, opt);
        v.check(s.fitted_exponent >= 1.6, code.name + " WER slope " + num(s.fitted_exponent, 3) + " +- " +
                                              num(s.fit_stderr, 3) + " >= 1.6 (14-26 dB)");
    }
    return v;
}

Verdict determinism()
{
    Verdict v;
    auto outage_csv = [](unsigned workers) {
        SimulationOptions opt;
        opt.master_seed = 42;
        opt.workers = workers;
        std::ostringstream os;
        write_csv(os, sweep(ProtocolSpec::make(ProtocolKind::NsdfFixed, 3, 2, 1), MultiplexingGain(0.2),
                            {0.0, 5.0, 10.0, 15.0}, 50001, opt));
        return os.str();
    };
    auto wer_csv = [](unsigned workers) {
        SimulationOptions opt;
        opt.master_seed = 42;
        opt.workers = workers;
        std::ostringstream os;
        write_csv(os, simulate_wer(ProtocolSpec::make(ProtocolKind::Naf, 2), naf_codebook(2, 2), {4.0, 8.0, 12.0}, 5003,
                                   opt));
        return os.str();
    };
    const auto o1 = outage_csv(1), w1 = wer_csv(1);
    bool same = true;
    for (unsigned w : {2u, 3u, 8u})
        same = same && outage_csv(w) == o1 && wer_csv(w) == w1;
    v.check(same, "outage and WER CSV identical for workers 1/2/3/8");
    return v;
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "analytic vs oracle", analytic_vs_oracle},
        {2, "point values", point_values},
        {3, "identities", identities},
        {4, "variable-ratio envelope", envelope},
        {5, "relay matrix properties", relay_matrices},
        {6, "Monte Carlo exponents", monte_carlo},
        {7, "code properties", code_properties},
        {8, "determinism", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        std::cout << (v.pass ? "PASS" : "FAIL") << ' ' << c.id << ' ' << c.name << ": " << v.detail << std::endl;
        failed += v.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
