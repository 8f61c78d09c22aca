// SPDX-License-Identifier: Apache-2.0
//
// Space-time codes for the relay protocols: the diagonal number-field code
// for orthogonal amplify-and-forward, the 2x2 cyclic-algebra code for
// non-orthogonal amplify-and-forward, row schedules for selection
// decode-and-forward, exhaustive ML decoding and word-error simulation.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmt/core.hpp"
#include "dmt/csv.hpp"
#include "dmt/outage.hpp"
#include "dmt/random.hpp"

namespace dmt {

// ---------------------------------------------------------------------------
// QAM

/// M^2-point square QAM, Gray labelled per dimension. `lattice` holds the
/// odd Gaussian integers (+-1, +-3, ...) and `points` the same scaled to
/// unit average energy.
struct Constellation {
    int M = 0;
    std::vector<cplx> lattice;
    std::vector<cplx> points;

    std::size_t size() const noexcept { return lattice.size(); }
    double average_lattice_energy() const noexcept { return 2.0 * (M * M - 1.0) / 3.0; }
};

namespace detail {

inline unsigned inverse_gray(unsigned g) noexcept
{
    unsigned b = g;
    for (unsigned s = g >> 1; s; s >>= 1)
        b ^= s;
    return b;
}

} // namespace detail

inline Constellation make_qam(int M)
{
    if (M < 2 || M > 16 || (M & (M - 1)) != 0)
        throw std::invalid_argument("QAM size per dimension must be 2, 4, 8 or 16");
    Constellation c;
    c.M = M;
    const double scale = 1.0 / std::sqrt(c.average_lattice_energy());
    for (unsigned label = 0; label < static_cast<unsigned>(M * M); ++label) {
        const unsigned i = detail::inverse_gray(label / M), q = detail::inverse_gray(label % M);
        const cplx pt(2.0 * i - (M - 1.0), 2.0 * q - (M - 1.0));
        c.lattice.push_back(pt);
        c.points.push_back(pt * scale);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Number fields

/// A degree-n totally real field with an integral basis; `conjugates(i, k)`
/// is the i-th embedding of basis element k. Elements with Gaussian-integer
/// coefficients have a non-zero Gaussian-integer norm, so the product of
/// their conjugates has magnitude at least 1.
struct NumberFieldEmbedding {
    int degree = 0;
    CMatrix conjugates;

    /// The n conjugates of sum_k coeffs[k] * basis[k].
    std::vector<cplx> embed(const std::vector<cplx>& coeffs) const
    {
        if (coeffs.size() != static_cast<std::size_t>(degree))
            throw std::invalid_argument("coefficient count must equal the field degree");
        std::vector<cplx> out(static_cast<std::size_t>(degree), 0.0);
        for (int i = 0; i < degree; ++i)
            for (int k = 0; k < degree; ++k)
                out[static_cast<std::size_t>(i)] += conjugates(i, k) * coeffs[static_cast<std::size_t>(k)];
        return out;
    }

    /// prod_i |sigma_i(l)|^2.
    double norm_sq(const std::vector<cplx>& coeffs) const
    {
        double p = 1.0;
        for (const auto& x : embed(coeffs))
            p *= std::norm(x);
        return p;
    }
};

/// Degree 2: Q(sqrt 5) with basis {1, phi}. Degree 3: the cyclic cubic
/// field of conductor 7 with basis {1, t, t^2}, t = 2 cos(2 pi / 7), whose
/// conjugates are 2 cos(2 pi 2^i / 7).
inline NumberFieldEmbedding build_embedding(int n)
{
    NumberFieldEmbedding e;
    e.degree = n;
    if (n == 2) {
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0, phibar = (1.0 - std::sqrt(5.0)) / 2.0;
        e.conjugates = CMatrix(2, 2);
        e.conjugates << 1.0, phi, 1.0, phibar;
        return e;
    }
    if (n == 3) {
        e.conjugates = CMatrix(3, 3);
        for (int i = 0; i < 3; ++i) {
            const double t = 2.0 * std::cos(2.0 * std::numbers::pi * (1 << i) / 7.0);
            e.conjugates(i, 0) = 1.0;
            e.conjugates(i, 1) = t;
            e.conjugates(i, 2) = t * t;
        }
        return e;
    }
    throw std::invalid_argument("number-field embedding is available for n = 2 and n = 3 only");
}

// ---------------------------------------------------------------------------
// Schedules

/// Relay `relay` (2-based, as in the node numbering) re-sends at
/// `send_slot` what it heard at `heard_slot`. Slots are 1-based.
struct RelayForward {
    int relay;
    int heard_slot;
    int send_slot;
};

/// Who transmits what in one codeword frame. The source sends vectorized
/// code symbols at `source_slots` (entry k carries symbol k of the
/// row-major vectorization).
struct Schedule {
    int slots = 0;
    std::vector<int> source_slots;
    std::vector<RelayForward> forwards;
};

/// Row ownership for the selection-DF code of dimension T = p + n q.
/// Rows are 1-based.
struct RowSchedule {
    int T = 0;
    std::vector<int> source_broadcast_rows;
    std::vector<int> source_relaying_rows;
    std::vector<std::vector<int>> relay_rows; // index j - 2 for relay j
    int delay = 0;
};

inline RowSchedule nsdf_schedule(int n, int p, int q)
{
    if (n < 2)
        throw std::invalid_argument("need n >= 2");
    if (q < 1 || p < q)
        throw std::invalid_argument("need p >= q >= 1");
    RowSchedule s;
    s.T = p + n * q;
    for (int r = 1; r <= p; ++r)
        s.source_broadcast_rows.push_back(r);
    for (int r = p + 1; r <= p + q; ++r)
        s.source_relaying_rows.push_back(r);
    // Relay j takes rows p + (j-1) q + 1 .. p + j q.
    for (int j = 2; j <= n; ++j) {
        std::vector<int> rows;
        for (int r = p + (j - 1) * q + 1; r <= p + j * q; ++r)
            rows.push_back(r);
        s.relay_rows.push_back(std::move(rows));
    }
    s.delay = (p + q) * (p + n * q);
    return s;
}

// ---------------------------------------------------------------------------
// Codebooks

/// Unscaled codewords, all rows x cols, stored column-major and flattened.
/// Transmission scales every codeword by theta(rho) = sqrt(T rho / max
/// energy), the largest factor keeping ||theta X||_F^2 <= T rho.
struct Codebook {
    std::string name;
    ProtocolKind protocol = ProtocolKind::Oaf;
    int n = 0;
    int M = 0;
    int rows = 0;
    int cols = 0;
    int T = 0; // channel uses per codeword
    std::vector<cplx> entries;
    double max_energy = 0.0;
    double theta = 1.0; // at the SNR the codebook was built for
    Schedule schedule;

    std::size_t size() const noexcept { return entries.size() / static_cast<std::size_t>(rows * cols); }
    double rate_bits_per_use() const { return std::log2(static_cast<double>(size())) / T; }
    double theta_at(double rho) const { return std::sqrt(T * rho / max_energy); }

    const cplx* data(std::size_t k) const { return entries.data() + k * static_cast<std::size_t>(rows * cols); }

    CMatrix matrix(std::size_t k) const
    {
        if (k >= size())
            throw std::out_of_range("codeword index out of range");
        return Eigen::Map<const CMatrix>(data(k), rows, cols);
    }

    void set_rho(double rho)
    {
        if (!(rho > 0.0) || !std::isfinite(rho))
            throw std::invalid_argument("rho must be positive");
        theta = theta_at(rho);
    }
};

namespace detail {

inline void finish_codebook(Codebook& c, double rho)
{
    const std::size_t per = static_cast<std::size_t>(c.rows * c.cols);
    c.max_energy = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        double e = 0.0;
        for (std::size_t i = 0; i < per; ++i)
            e += std::norm(c.entries[k * per + i]);
        c.max_energy = std::max(c.max_energy, e);
    }
    c.set_rho(rho);
}

// Calls f(digits) for every base-`base` word of length `len`, the first
// digit varying slowest.
template <class F>
void for_each_word(std::size_t base, int len, F&& f)
{
    std::vector<std::size_t> d(static_cast<std::size_t>(len), 0);
    while (true) {
        f(d);
        int i = len - 1;
        while (i >= 0 && ++d[static_cast<std::size_t>(i)] == base)
            d[static_cast<std::size_t>(i--)] = 0;
        if (i < 0)
            return;
    }
}

} // namespace detail

/// Relay matrices with unit gains: A_j is (n-1) x n with a single 1 at
/// (j-1, j).
inline std::vector<CMatrix> oaf_relay_matrices(int n)
{
    return oaf_single_entry_matrices(n, std::vector<double>(static_cast<std::size_t>(std::max(n - 1, 0)), 1.0));
}

/// Codewords x = (l, sigma(l), ..., sigma^{n-1}(l)) as n x 1 columns, with
/// l = sum_k a_k basis_k and the a_k ranging over QAM lattice points:
/// (M^2)^n codewords. The source sends x over n uses; relay j re-sends
/// component j in relaying use j-1.
inline Codebook oaf_diagonal_codebook(int n, int M, double rho = 1.0)
{
    const auto field = build_embedding(n);
    const auto qam = make_qam(M);
    Codebook c;
    c.name = "oaf-diag";
    c.protocol = ProtocolKind::Oaf;
    c.n = n;
    c.M = M;
    c.rows = n;
    c.cols = 1;
    c.T = 2 * n - 1;
    detail::for_each_word(qam.size(), n, [&](const std::vector<std::size_t>& d) {
        std::vector<cplx> coeffs;
        for (auto i : d)
            coeffs.push_back(qam.lattice[i]);
        for (const auto& x : field.embed(coeffs))
            c.entries.push_back(x);
    });
    for (int k = 1; k <= n; ++k)
        c.schedule.source_slots.push_back(k);
    for (int j = 2; j <= n; ++j)
        c.schedule.forwards.push_back({j, j, n + j - 1});
    c.schedule.slots = 2 * n - 1;
    detail::finish_codebook(c, rho);
    return c;
}

/// 2x2 codewords [[l0, i sigma(l1)], [l1, sigma(l0)]] over the golden field:
/// det = N(l0) - i N(l1), which is a non-zero Gaussian integer for every
/// non-zero pair. Four QAM coefficients per codeword give (M^2)^4 codewords.
/// The source sends the rows one after the other (t = 1..4) and the relay
/// re-sends at t = 3, 4 what it heard at t = 1, 2.
inline Codebook naf_codebook(int n, int M, double rho = 1.0)
{
    if (n != 2)
        throw std::invalid_argument("the non-orthogonal AF code is available for n = 2 only");
    if (M > 4)
        throw std::invalid_argument("naf_codebook: M <= 4 keeps the codebook within 2^16 words");
    const auto field = build_embedding(2);
    const auto qam = make_qam(M);
    const cplx gamma(0.0, 1.0);
    Codebook c;
    c.name = "naf";
    c.protocol = ProtocolKind::Naf;
    c.n = n;
    c.M = M;
    c.rows = 2;
    c.cols = 2;
    c.T = 4;
    detail::for_each_word(qam.size(), 4, [&](const std::vector<std::size_t>& d) {
        const auto l0 = field.embed({qam.lattice[d[0]], qam.lattice[d[1]]});
        const auto l1 = field.embed({qam.lattice[d[2]], qam.lattice[d[3]]});
        // Column-major: (0,0), (1,0), (0,1), (1,1).
        c.entries.push_back(l0[0]);
        c.entries.push_back(l1[0]);
        c.entries.push_back(gamma * l1[1]);
        c.entries.push_back(l0[1]);
    });
    // Relay i forwards at 4(n-1)(i-2) + 2(n-1) + k what it heard at
    // 4(n-1)(i-2) + k, k = 1 .. 2(n-1).
    c.schedule.slots = 4 * (n - 1) * (n - 1);
    for (int t = 1; t <= c.schedule.slots; ++t)
        c.schedule.source_slots.push_back(t);
    for (int i = 2; i <= n; ++i)
        for (int k = 1; k <= 2 * (n - 1); ++k) {
            const int base = 4 * (n - 1) * (i - 2);
            c.schedule.forwards.push_back({i, base + k, base + 2 * (n - 1) + k});
        }
    detail::finish_codebook(c, rho);
    return c;
}

inline void write_codebook_csv(std::ostream& os, const Codebook& c)
{
    os << "index,row,col,re,im\n";
    for (std::size_t k = 0; k < c.size(); ++k) {
        const cplx* x = c.data(k);
        for (int col = 0; col < c.cols; ++col)
            for (int row = 0; row < c.rows; ++row) {
                const cplx v = c.theta * x[col * c.rows + row];
                os << k << ',' << row << ',' << col << ',' << csv::number(v.real()) << ',' << csv::number(v.imag())
                   << '\n';
            }
    }
}

// ---------------------------------------------------------------------------
// Decoding

/// Effective channel of one frame: received Y = theta * H * X + noise, where
/// row i of the noise has variance noise_var[i]. H is out_rows x code rows.
struct FrameChannel {
    CMatrix H;
    std::vector<double> noise_var;
};

/// Diagonal code: diag(g_1, g_2 h_2, ..., g_n h_n), noise variance 1 on the
/// direct symbol and 1 + |h_j|^2 on relayed ones (unit relay gain).
inline FrameChannel oaf_diagonal_channel(const ChannelRealization& ch)
{
    const Eigen::Index n = static_cast<Eigen::Index>(ch.g.size());
    FrameChannel f{CMatrix::Zero(n, n), std::vector<double>(static_cast<std::size_t>(n), 1.0)};
    f.H(0, 0) = ch.g[0];
    for (Eigen::Index j = 1; j < n; ++j) {
        f.H(j, j) = ch.g[static_cast<std::size_t>(j)] * ch.h[static_cast<std::size_t>(j - 1)];
        f.noise_var[static_cast<std::size_t>(j)] = 1.0 + std::norm(ch.h[static_cast<std::size_t>(j - 1)]);
    }
    return f;
}

/// Two-relay-slot frame of the 2x2 code: [[g_1, 0], [b h g, g_1]] with the
/// relay gain b^2 = rho / (rho |g|^2 + 1); the second row carries the
/// forwarded relay noise.
inline FrameChannel naf_frame_channel(const ChannelRealization& ch, double rho)
{
    if (ch.g.size() != 2 || ch.h.size() != 1)
        throw std::invalid_argument("the 2x2 frame channel needs n = 2");
    const double b2 = naf_amplification_sq(rho, ch.g[1]);
    FrameChannel f{CMatrix(2, 2), {1.0, 1.0 + b2 * std::norm(ch.h[0])}};
    f.H << ch.g[0], 0.0, std::sqrt(b2) * ch.h[0] * ch.g[1], ch.g[0];
    return f;
}

/// Exhaustive ML: argmin_k sum |(Y - theta H X_k)_{ij}|^2 / noise_var[i].
/// Ties go to the lowest index.
inline std::size_t ml_decode(const Codebook& code, double theta, const FrameChannel& f, const CMatrix& Y)
{
    const Eigen::Index R = code.rows, C = code.cols;
    if (f.H.cols() != R || Y.cols() != C || Y.rows() != f.H.rows() ||
        f.noise_var.size() != static_cast<std::size_t>(f.H.rows()))
        throw std::invalid_argument("ml_decode: dimension mismatch");
    const Eigen::Index O = f.H.rows();
    // Whitened, scaled channel and observation.
    CMatrix G(O, R), Yw(O, C);
    for (Eigen::Index i = 0; i < O; ++i) {
        const double w = 1.0 / std::sqrt(f.noise_var[static_cast<std::size_t>(i)]);
        G.row(i) = theta * w * f.H.row(i);
        Yw.row(i) = w * Y.row(i);
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    const std::size_t words = code.size();
    for (std::size_t k = 0; k < words; ++k) {
        const cplx* x = code.data(k);
        double d = 0.0;
        for (Eigen::Index c = 0; c < C && d < best_d; ++c)
            for (Eigen::Index i = 0; i < O; ++i) {
                cplx s = Yw(i, c);
                for (Eigen::Index r = 0; r < R; ++r)
                    s -= G(i, r) * x[c * R + r];
                d += std::norm(s);
            }
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Word-error simulation

namespace detail {

inline FrameChannel frame_channel_for(const Codebook& code, const ChannelRealization& ch, double rho)
{
    return code.protocol == ProtocolKind::Naf ? naf_frame_channel(ch, rho) : oaf_diagonal_channel(ch);
}

inline std::uint64_t count_word_errors(const ProtocolSpec& spec, const Codebook& code, double rho, std::uint64_t first,
                                       std::uint64_t count, const SimulationOptions& opt)
{
    const double theta = code.theta_at(rho);
    std::uint64_t errors = 0;
    for (std::uint64_t t = first; t < first + count; ++t) {
        TrialRng rng(opt.master_seed, t);
        auto ch = sample_channel(spec, rng);
        if (opt.hook)
            opt.hook(ch);
        const auto f = frame_channel_for(code, ch, rho);
        const std::size_t sent = static_cast<std::size_t>(rng.below(code.size()));
        const CMatrix X = code.matrix(sent);
        CMatrix Y = theta * f.H * X;
        for (Eigen::Index c = 0; c < Y.cols(); ++c)
            for (Eigen::Index i = 0; i < Y.rows(); ++i)
                Y(i, c) += std::sqrt(f.noise_var[static_cast<std::size_t>(i)]) * rng.complex_normal();
        if (ml_decode(code, theta, f, Y) != sent)
            ++errors;
    }
    return errors;
}

} // namespace detail

inline void check_code_matches(const ProtocolSpec& spec, const Codebook& code)
{
    spec.validate();
    const bool ok = (code.protocol == ProtocolKind::Oaf && spec.kind == ProtocolKind::Oaf) ||
                    (code.protocol == ProtocolKind::Naf && spec.kind == ProtocolKind::Naf);
    if (!ok || code.n != spec.n)
        throw std::invalid_argument("code '" + code.name + "' does not match protocol " + std::string(to_string(spec.kind)) +
                                    " with n=" + std::to_string(spec.n));
}

/// Word-error rates over an SNR list, in the same series shape as the
/// outage sweeps (outage_count holds word errors). Point i uses trials
/// [i * trials, (i + 1) * trials). The fit is attached when at least three
/// points saw errors.
inline OutageSeries simulate_wer(const ProtocolSpec& spec, const Codebook& code, const std::vector<double>& snr_db,
                                 std::uint64_t trials, const SimulationOptions& opt)
{
    check_code_matches(spec, code);
    if (trials < 1)
        throw std::invalid_argument("trials must be >= 1");
    for (std::size_t i = 1; i < snr_db.size(); ++i)
        if (!(snr_db[i] > snr_db[i - 1]))
            throw std::invalid_argument("SNR points must be strictly increasing");
    OutageSeries s;
    s.protocol = spec;
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        const double rho = db_to_linear(snr_db[i]);
        OutagePoint pt;
        pt.snr_db = snr_db[i];
        pt.trials = trials;
        pt.outage_count = detail::parallel_sum(static_cast<std::uint64_t>(i) * trials, trials, opt.workers,
                                               [&](std::uint64_t a, std::uint64_t c) {
                                                   return detail::count_word_errors(spec, code, rho, a, c, opt);
                                               });
        s.points.push_back(pt);
    }
    if (s.usable_points() >= 3) {
        const auto fit = estimate_exponent(s);
        s.fitted_exponent = fit.slope;
        s.fit_stderr = fit.std_error;
    }
    return s;
}

} // namespace dmt
