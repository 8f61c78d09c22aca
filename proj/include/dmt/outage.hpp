// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo outage estimation for the relay protocols and log-log slope
// fitting of the measured outage curves.
//
// Noise at every receiver has unit variance and each transmitted symbol has
// energy rho, so rho is the per-symbol SNR. Rates are in bits per channel
// use, R = r log2(rho).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dmt/core.hpp"
#include "dmt/csv.hpp"
#include "dmt/random.hpp"

namespace dmt {

using CMatrix = Eigen::MatrixXcd;

// ---------------------------------------------------------------------------
// Orthogonal amplify-and-forward channel

/// Relay gain alpha^2 = rho / (p rho |g|^2 + 1): the largest gain that keeps
/// the relay's average transmit energy at rho when it listened for p uses.
inline double oaf_amplification_sq(double rho, int p, cplx g)
{
    return rho / (p * rho * std::norm(g) + 1.0);
}

/// Single-entry relay matrices: A_j is (n-1) x n with alpha_j at row j-1,
/// column j (one-based, j = 2..n). Their row spaces are mutually orthogonal.
inline std::vector<CMatrix> oaf_single_entry_matrices(int n, const std::vector<double>& alphas)
{
    if (n < 2)
        throw std::invalid_argument("need n >= 2");
    if (alphas.size() != static_cast<std::size_t>(n - 1))
        throw std::invalid_argument("need one gain per relay");
    std::vector<CMatrix> A;
    for (int j = 2; j <= n; ++j) {
        CMatrix a = CMatrix::Zero(n - 1, n);
        a(j - 2, j - 1) = alphas[static_cast<std::size_t>(j - 2)];
        A.push_back(std::move(a));
    }
    return A;
}

/// Relay matrices for one realization, with gains set by the energy rule.
inline std::vector<CMatrix> oaf_single_entry_matrices(const ChannelRealization& ch, double rho)
{
    const int n = static_cast<int>(ch.g.size());
    std::vector<double> alphas;
    for (int j = 1; j < n; ++j)
        alphas.push_back(std::sqrt(oaf_amplification_sq(rho, n, ch.g[static_cast<std::size_t>(j)])));
    return oaf_single_entry_matrices(n, alphas);
}

/// B = sum_j g_j h_j A_j, the effective relaying-phase channel.
inline CMatrix oaf_relay_sum(const ChannelRealization& ch, const std::vector<CMatrix>& A)
{
    if (A.empty() || A.size() != ch.h.size() || ch.g.size() != A.size() + 1)
        throw std::invalid_argument("relay matrices do not match the channel");
    CMatrix B = CMatrix::Zero(A[0].rows(), A[0].cols());
    for (std::size_t j = 0; j < A.size(); ++j)
        B += ch.g[j + 1] * ch.h[j] * A[j];
    return B;
}

/// Stacked channel [g_1 I_p; B] from source to destination.
inline CMatrix oaf_channel_matrix(const ChannelRealization& ch, const std::vector<CMatrix>& A)
{
    const CMatrix B = oaf_relay_sum(ch, A);
    const Eigen::Index p = B.cols(), q = B.rows();
    CMatrix H(p + q, p);
    H.topRows(p) = ch.g[0] * CMatrix::Identity(p, p);
    H.bottomRows(q) = B;
    return H;
}

/// Destination noise covariance diag(I_p, I_q + sum_j |h_j|^2 A_j A_j^H).
inline CMatrix oaf_noise_covariance(const ChannelRealization& ch, const std::vector<CMatrix>& A)
{
    const Eigen::Index q = A.at(0).rows(), p = A.at(0).cols();
    CMatrix S = CMatrix::Identity(p + q, p + q);
    for (std::size_t j = 0; j < A.size(); ++j)
        S.bottomRightCorner(q, q) += std::norm(ch.h[j]) * A[j] * A[j].adjoint();
    return S;
}

/// log2 det(I + rho H H^H S^-1) for Hermitian positive-definite S, via the
/// similar matrix I + rho L^-1 H H^H L^-H where S = L L^H.
inline double log2_det_whitened(const CMatrix& H, const CMatrix& S, double rho)
{
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw std::invalid_argument("rho must be finite and non-negative");
    if (!H.allFinite() || !S.allFinite())
        throw std::invalid_argument("non-finite channel");
    Eigen::LLT<CMatrix> chol_s(S);
    if (chol_s.info() != Eigen::Success)
        throw std::invalid_argument("noise covariance is not positive definite");
    const CMatrix W = chol_s.matrixL().solve(H);
    const CMatrix M = CMatrix::Identity(H.rows(), H.rows()) + rho * W * W.adjoint();
    Eigen::LLT<CMatrix> chol_m(M);
    if (chol_m.info() != Eigen::Success)
        throw std::runtime_error("information matrix is not positive definite");
    double bits = 0.0;
    const CMatrix& L = chol_m.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i)
        bits += 2.0 * std::log2(L(i, i).real());
    return bits;
}

/// Mutual information in bits per frame for arbitrary relay matrices.
inline double mutual_info_oaf(const ChannelRealization& ch, const std::vector<CMatrix>& A, double rho)
{
    if (!ch.finite())
        throw std::invalid_argument("non-finite channel");
    return log2_det_whitened(oaf_channel_matrix(ch, A), oaf_noise_covariance(ch, A), rho);
}

/// Mutual information in bits per (2n-1)-use frame of the p = n, q = n-1
/// protocol with single-entry relay matrices.
inline double mutual_info_oaf(const ChannelRealization& ch, double rho, int n)
{
    if (n < 2 || ch.g.size() != static_cast<std::size_t>(n) || ch.h.size() != static_cast<std::size_t>(n - 1))
        throw std::invalid_argument("channel does not match n");
    return mutual_info_oaf(ch, oaf_single_entry_matrices(ch, rho), rho);
}

/// Smallest eigenvalue of (n-1) sum_j |g_j h_j|^2 A_j A_j^H - B B^H. The
/// Cauchy-Schwarz bound on the relay sum says it is never negative.
inline double relay_sum_psd_margin(const ChannelRealization& ch, const std::vector<CMatrix>& A)
{
    const CMatrix B = oaf_relay_sum(ch, A);
    CMatrix D = -B * B.adjoint();
    const double count = static_cast<double>(A.size());
    for (std::size_t j = 0; j < A.size(); ++j)
        D += count * std::norm(ch.g[j + 1] * ch.h[j]) * A[j] * A[j].adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(D, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Non-orthogonal amplify-and-forward channel

/// Relay gain b^2 = rho / (rho |g|^2 + 1) for a relay that listened once.
inline double naf_amplification_sq(double rho, cplx g) { return rho / (rho * std::norm(g) + 1.0); }

/// Mutual information of the n-1 two-use frames, in bits. In frame i the
/// source sends x1, x2 and relay i forwards b (g_i x1 + v) during x2:
/// H_f = [[g_1, 0], [b h_i g_i, g_1]], noise covariance diag(1, 1 + b^2 |h_i|^2).
inline double mutual_info_naf(const ChannelRealization& ch, double rho)
{
    if (ch.g.size() < 2 || ch.h.size() + 1 != ch.g.size())
        throw std::invalid_argument("NAF needs n >= 2");
    if (!ch.finite())
        throw std::invalid_argument("non-finite channel");
    double bits = 0.0;
    for (std::size_t i = 0; i < ch.h.size(); ++i) {
        const cplx g = ch.g[i + 1], h = ch.h[i];
        const double b2 = naf_amplification_sq(rho, g);
        CMatrix H(2, 2);
        H << ch.g[0], 0.0, std::sqrt(b2) * h * g, ch.g[0];
        CMatrix S = CMatrix::Identity(2, 2);
        S(1, 1) += b2 * std::norm(h);
        bits += log2_det_whitened(H, S, rho);
    }
    return bits;
}

// ---------------------------------------------------------------------------
// Outage events per protocol

/// R = offset + r log2(rho), floored at zero. A positive offset with r = 0
/// is a fixed-rate link, whose outage slope is the full diversity order.
struct RateRule {
    MultiplexingGain r;
    double offset_bits = 0.0;

    double rate(double rho) const { return std::max(0.0, offset_bits + r.value() * std::log2(rho)); }
    double rate_db(double snr_db) const { return rate(db_to_linear(snr_db)); }
};

/// Relays whose broadcast-phase link supports m R bits in p uses.
inline bool relay_decodes(const ProtocolSpec& spec, cplx g, double rho, double R)
{
    return spec.p * std::log2(1.0 + rho * std::norm(g)) >= spec.m() * R;
}

/// Whether a frame at rate R (bits per use) fails on this realization.
inline bool in_outage(const ProtocolSpec& spec, const ChannelRealization& ch, double rho, double R)
{
    switch (spec.kind) {
    case ProtocolKind::Miso: {
        double sum = 0.0;
        for (const auto& g : ch.g)
            sum += std::norm(g);
        return std::log2(1.0 + rho * sum) < R;
    }
    case ProtocolKind::Oaf:
        if (spec.p != spec.n || spec.q != spec.n - 1)
            throw std::invalid_argument("OAF outage is simulated for p = n, q = n-1 only");
        return mutual_info_oaf(ch, rho, spec.n) < spec.m() * R;
    case ProtocolKind::Naf: return mutual_info_naf(ch, rho) < 2.0 * (spec.n - 1) * R;
    case ProtocolKind::NsdfFixed:
    case ProtocolKind::OsdfFixed: {
        const double direct = std::norm(ch.g[0]);
        double relayed = 0.0;
        for (std::size_t j = 0; j < ch.h.size(); ++j)
            if (relay_decodes(spec, ch.g[j + 1], rho, R))
                relayed += std::norm(ch.h[j]);
        const double second = spec.kind == ProtocolKind::NsdfFixed ? direct + relayed : relayed;
        const double bits = spec.p * std::log2(1.0 + rho * direct) + spec.q * std::log2(1.0 + rho * second);
        return bits < spec.m() * R;
    }
    case ProtocolKind::NsdfVariable:
    case ProtocolKind::OsdfVariable:
        throw std::invalid_argument("outage simulation needs a fixed integer frame (use nsdf-fixed or osdf-fixed)");
    }
    throw std::logic_error("unhandled protocol");
}

// ---------------------------------------------------------------------------
// Estimates

struct OutagePoint {
    double snr_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t outage_count = 0;

    double rho() const { return db_to_linear(snr_db); }
    double p_hat() const { return static_cast<double>(outage_count) / static_cast<double>(trials); }
    /// Binomial standard error of p_hat.
    double std_error() const
    {
        const double p = p_hat();
        return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    }
};

struct OutageSeries {
    ProtocolSpec protocol;
    MultiplexingGain r{0.0};
    std::vector<OutagePoint> points;
    double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    double fit_stderr = std::numeric_limits<double>::quiet_NaN();

    std::size_t usable_points() const
    {
        return static_cast<std::size_t>(
            std::count_if(points.begin(), points.end(), [](const OutagePoint& p) { return p.outage_count > 0; }));
    }
    std::size_t zero_points() const { return points.size() - usable_points(); }
};

struct ExponentFit {
    double slope;
    double std_error;
    std::size_t points;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Negated least-squares slope of log10 p against log10 rho, with its
/// standard error from the residuals.
inline ExponentFit fit_exponent(const std::vector<double>& log10_rho, const std::vector<double>& log10_p)
{
    const std::size_t k = log10_rho.size();
    if (k != log10_p.size())
        throw std::invalid_argument("fit_exponent: size mismatch");
    if (k < 3)
        throw InsufficientData("need at least 3 points with non-zero outage to fit an exponent, got " +
                               std::to_string(k));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += log10_rho[i];
        my += log10_p[i];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (log10_rho[i] - mx) * (log10_rho[i] - mx);
        sxy += (log10_rho[i] - mx) * (log10_p[i] - my);
    }
    if (!(sxx > 0.0))
        throw InsufficientData("fit_exponent: SNR points must be distinct");
    const double b = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double e = log10_p[i] - (my + b * (log10_rho[i] - mx));
        sse += e * e;
    }
    return {-b, std::sqrt(sse / static_cast<double>(k - 2) / sxx), k};
}

/// Fit over the points with a non-zero outage count.
inline ExponentFit estimate_exponent(const OutageSeries& series)
{
    std::vector<double> x, y;
    for (const auto& pt : series.points) {
        if (pt.outage_count == 0)
            continue;
        x.push_back(pt.snr_db / 10.0);
        y.push_back(std::log10(pt.p_hat()));
    }
    return fit_exponent(x, y);
}

/// Optional per-trial edit of the fading draw, applied before the outage
/// test (for pinning a link in experiments).
using ChannelHook = std::function<void(ChannelRealization&)>;

struct SimulationOptions {
    std::uint64_t master_seed = 1;
    unsigned workers = 1;
    double rate_offset_bits = 0.0;
    ChannelHook hook;
};

namespace detail {

inline std::uint64_t count_outages(const ProtocolSpec& spec, double rho, double R, std::uint64_t first,
                                   std::uint64_t count, const SimulationOptions& opt)
{
    std::uint64_t outages = 0;
    for (std::uint64_t t = first; t < first + count; ++t) {
        TrialRng rng(opt.master_seed, t);
        auto ch = sample_channel(spec, rng);
        if (opt.hook)
            opt.hook(ch);
        if (in_outage(spec, ch, rho, R))
            ++outages;
    }
    return outages;
}

// Splits [first, first + count) into contiguous chunks, one per worker.
// Every trial's randomness depends only on its global index, so the total
// is the same for any worker count.
template <class Work>
std::uint64_t parallel_sum(std::uint64_t first, std::uint64_t count, unsigned workers, Work work)
{
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2)
        return work(first, count);
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
    std::vector<std::uint64_t> partial(workers, 0);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::uint64_t base = count / workers, extra = count % workers;
    std::uint64_t start = first;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t len = base + (w < extra ? 1 : 0);
        pool.emplace_back([&, w, start, len] {
            try {
                partial[w] = work(start, len);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        start += len;
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::uint64_t total = 0;
    for (auto v : partial)
        total += v;
    return total;
}

} // namespace detail

/// Outage estimate at one SNR from trials [first_trial, first_trial + trials).
inline OutagePoint outage_prob(const ProtocolSpec& spec, MultiplexingGain r, double snr_db, std::uint64_t trials,
                               const SimulationOptions& opt, std::uint64_t first_trial = 0)
{
    spec.validate();
    if (trials < 1)
        throw std::invalid_argument("trials must be >= 1");
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("SNR must be finite");
    const double rho = db_to_linear(snr_db);
    const double R = RateRule{r, opt.rate_offset_bits}.rate(rho);
    OutagePoint pt;
    pt.snr_db = snr_db;
    pt.trials = trials;
    pt.outage_count = detail::parallel_sum(first_trial, trials, opt.workers, [&](std::uint64_t a, std::uint64_t c) {
        return detail::count_outages(spec, rho, R, a, c, opt);
    });
    return pt;
}

inline OutagePoint outage_prob(const ProtocolSpec& spec, MultiplexingGain r, double snr_db, std::uint64_t trials,
                               std::uint64_t master_seed)
{
    SimulationOptions opt;
    opt.master_seed = master_seed;
    return outage_prob(spec, r, snr_db, trials, opt);
}

/// Outage points over an SNR list, without fitting. Point i draws trials
/// [i * trials, (i + 1) * trials), so points are independent.
inline OutageSeries sweep_points(const ProtocolSpec& spec, MultiplexingGain r, const std::vector<double>& snr_db,
                                 std::uint64_t trials, const SimulationOptions& opt)
{
    for (std::size_t i = 1; i < snr_db.size(); ++i)
        if (!(snr_db[i] > snr_db[i - 1]))
            throw std::invalid_argument("SNR points must be strictly increasing");
    OutageSeries s;
    s.protocol = spec;
    s.r = r;
    for (std::size_t i = 0; i < snr_db.size(); ++i)
        s.points.push_back(outage_prob(spec, r, snr_db[i], trials, opt, static_cast<std::uint64_t>(i) * trials));
    return s;
}

/// sweep_points plus the fitted exponent. Throws InsufficientData when
/// fewer than 3 points saw an outage.
inline OutageSeries sweep(const ProtocolSpec& spec, MultiplexingGain r, const std::vector<double>& snr_db,
                          std::uint64_t trials, const SimulationOptions& opt)
{
    auto s = sweep_points(spec, r, snr_db, trials, opt);
    const auto fit = estimate_exponent(s);
    s.fitted_exponent = fit.slope;
    s.fit_stderr = fit.std_error;
    return s;
}

inline void write_csv_header(std::ostream& os) { os << "snr_db,rho,trials,outage_count,p_hat,stderr\n"; }

inline void write_csv_row(std::ostream& os, const OutagePoint& pt)
{
    os << csv::number(pt.snr_db) << ',' << csv::number(pt.rho()) << ',' << pt.trials << ',' << pt.outage_count << ','
       << csv::number(pt.p_hat()) << ',' << csv::number(pt.std_error()) << '\n';
}

inline void write_csv_fit(std::ostream& os, const OutageSeries& s)
{
    os << "# slope=" << csv::number(s.fitted_exponent) << " stderr=" << csv::number(s.fit_stderr) << '\n';
}

inline void write_csv(std::ostream& os, const OutageSeries& s)
{
    write_csv_header(os);
    for (const auto& pt : s.points)
        write_csv_row(os, pt);
    if (std::isfinite(s.fitted_exponent))
        write_csv_fit(os, s);
}

} // namespace dmt
