// SPDX-License-Identifier: Apache-2.0
//
// Shared value types for the relay-protocol DMT library.

#pragma once

#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dmt {

using cplx = std::complex<double>;

/// Comparison tolerance for curve abscissas that are not exact binary
/// fractions (irrational breakpoints such as 1/(kappa_n + 1)).
inline constexpr double kCurveTol = 1e-12;

/// Multiplexing gain r, restricted to [0, 1].
class MultiplexingGain {
public:
    explicit MultiplexingGain(double r) : r_(r)
    {
        if (!(r >= 0.0 && r <= 1.0))
            throw std::domain_error("multiplexing gain must lie in [0, 1], got " + std::to_string(r));
    }

    double value() const noexcept { return r_; }
    operator double() const noexcept { return r_; }

private:
    double r_;
};

/// Real number extended with +infinity. Used for exponents of events whose
/// probability decays faster than any power of the SNR.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : value_(v) {}

    static constexpr ExtendedReal infinity() noexcept
    {
        ExtendedReal e;
        e.infinite_ = true;
        return e;
    }

    constexpr bool is_infinite() const noexcept { return infinite_; }

    /// Finite value; throws if infinite.
    double value() const
    {
        if (infinite_)
            throw std::logic_error("ExtendedReal: value() on +infinity");
        return value_;
    }

    double as_double() const noexcept
    {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) noexcept
    {
        if (a.infinite_ || b.infinite_)
            return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }

    friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) noexcept
    {
        if (a.infinite_ && b.infinite_)
            return std::partial_ordering::equivalent;
        if (a.infinite_)
            return std::partial_ordering::greater;
        if (b.infinite_)
            return std::partial_ordering::less;
        return a.value_ <=> b.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

enum class ProtocolKind {
    Oaf,
    NsdfFixed,
    NsdfVariable,
    OsdfFixed,
    OsdfVariable,
    Naf,
    Miso,
};

inline std::string_view to_string(ProtocolKind k)
{
    switch (k) {
    case ProtocolKind::Oaf: return "oaf";
    case ProtocolKind::NsdfFixed: return "nsdf-fixed";
    case ProtocolKind::NsdfVariable: return "nsdf-variable";
    case ProtocolKind::OsdfFixed: return "osdf-fixed";
    case ProtocolKind::OsdfVariable: return "osdf-variable";
    case ProtocolKind::Naf: return "naf";
    case ProtocolKind::Miso: return "miso";
    }
    return "?";
}

inline ProtocolKind parse_protocol(std::string_view s)
{
    if (s == "oaf") return ProtocolKind::Oaf;
    if (s == "nsdf" || s == "nsdf-fixed") return ProtocolKind::NsdfFixed;
    if (s == "nsdf-variable") return ProtocolKind::NsdfVariable;
    if (s == "osdf" || s == "osdf-fixed") return ProtocolKind::OsdfFixed;
    if (s == "osdf-variable") return ProtocolKind::OsdfVariable;
    if (s == "naf") return ProtocolKind::Naf;
    if (s == "miso") return ProtocolKind::Miso;
    throw std::invalid_argument("unknown protocol '" + std::string(s) + "'");
}

/// Which protocol runs and with what phase lengths.
///
/// `n` counts the source plus the n-1 relays. `p` and `q` are the lengths of
/// the broadcast and relaying phases; only the fixed-ratio variants and OAF
/// read them. The MISO reference accepts n = 1 (a single-antenna link);
/// every relay protocol needs at least one relay.
struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::Oaf;
    int n = 2;
    int p = 1;
    int q = 1;

    int m() const noexcept { return p + q; }

    static ProtocolSpec make(ProtocolKind kind, int n, int p = 1, int q = 1)
    {
        ProtocolSpec s{kind, n, p, q};
        s.validate();
        return s;
    }

    void validate() const
    {
        const int min_n = kind == ProtocolKind::Miso ? 1 : 2;
        if (n < min_n)
            throw std::invalid_argument("n must be >= " + std::to_string(min_n) + " for " + std::string(to_string(kind)));
        if (p < 1)
            throw std::invalid_argument("p must be >= 1");
        // q = 0 is the non-cooperative OAF limit.
        if (q < (kind == ProtocolKind::Oaf ? 0 : 1))
            throw std::invalid_argument("q out of range");
        if ((kind == ProtocolKind::NsdfFixed || kind == ProtocolKind::OsdfFixed) && p < q)
            throw std::invalid_argument("fixed selection-DF protocols require p >= q");
    }
};

/// One quasi-static draw of all fading coefficients.
/// g[0] is source->destination, g[j] (j >= 1) source->relay j, and h[j-1]
/// the matching relay->destination link.
struct ChannelRealization {
    std::vector<cplx> g;
    std::vector<cplx> h;

    bool finite() const noexcept
    {
        for (const auto& x : g)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
                return false;
        for (const auto& x : h)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
                return false;
        return true;
    }
};

inline double db_to_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

} // namespace dmt
