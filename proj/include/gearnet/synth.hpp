#pragma once

#include "gearnet/data.hpp"
#include "gearnet/manifest.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace gearnet {

/// Parameters of the synthetic two-gear accelerometer stream.
///
/// Each skier gets one intensity A and one cycle frequency f (Hz) drawn
/// uniformly from the ranges, then performs `cycles_per_gear` cycles of
/// gear 2 followed by the same number of gear 3 cycles. Gears differ only
/// in their harmonic profile, so A and f carry no class information.
struct SynthSpec {
    std::size_t cycles_per_gear = 18;
    std::size_t skiers = 41;  // about 2,000 training windows after the split
    double intensity_min = 0.5;
    double intensity_max = 2.0;
    double frequency_min = 0.7;
    double frequency_max = 1.4;
    double noise_std = 0.15;
    double sample_rate = 50.0;

    void validate() const;
    KeyValues to_key_values() const;
};

struct HarmonicProfile {
    std::array<double, 3> amplitude;                 // per harmonic k = 1..3
    std::array<std::array<double, 3>, 3> phase;      // [harmonic][channel]
};

const HarmonicProfile& gear_profile(int gear);

/// Noise-free value of one channel at time `seconds` for gear g, scale A and
/// frequency f: sum_k A·a_k·sin(2π·k·f·t + φ_k,ch).
double gear_signal(int gear, std::size_t channel, double intensity, double frequency, double seconds);

std::vector<Record> synth_generate(const SynthSpec& spec, std::uint64_t seed);

}  // namespace gearnet
