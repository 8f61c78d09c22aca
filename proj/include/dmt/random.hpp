// SPDX-License-Identifier: Apache-2.0
//
// Counter-based randomness: every Monte Carlo trial owns a stream derived
// from (master_seed, trial_index) alone, so results never depend on how
// trials are distributed across workers.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dmt/core.hpp"

namespace dmt {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-trial generator. A SplitMix64 sequence whose starting state is a
/// mixing of the master seed and the trial index.
class TrialRng {
public:
    TrialRng(std::uint64_t master_seed, std::uint64_t trial_index) noexcept
        : state_(mix64(master_seed ^ mix64(trial_index + 0x9e3779b97f4a7c15ULL)))
    {
    }

    std::uint64_t next_u64() noexcept
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        // 128-bit multiply-shift; bias is below 2^-64 * bound.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// Circularly symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
    cplx complex_normal() noexcept
    {
        const double radius = std::sqrt(-std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

private:
    std::uint64_t state_;
};

/// Fading draw continuing on an existing trial stream, so the caller can
/// keep drawing (codeword choice, noise) from it afterwards.
inline ChannelRealization sample_channel(const ProtocolSpec& spec, TrialRng& rng)
{
    ChannelRealization ch;
    ch.g.resize(static_cast<std::size_t>(spec.n));
    ch.h.resize(static_cast<std::size_t>(spec.n - 1));
    for (auto& x : ch.g)
        x = rng.complex_normal();
    for (auto& x : ch.h)
        x = rng.complex_normal();
    return ch;
}

/// Fading draw for trial `trial_index`: n source-side gains then n-1
/// relay-destination gains, all i.i.d. CN(0, 1).
inline ChannelRealization sample_channel(const ProtocolSpec& spec, std::uint64_t trial_index, std::uint64_t master_seed)
{
    TrialRng rng(master_seed, trial_index);
    return sample_channel(spec, rng);
}

} // namespace dmt
