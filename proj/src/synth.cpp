#include "gearnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

namespace gearnet {

namespace {

// Both gears share the fundamental; the second and third harmonics swap
// weight and shift phase.
const HarmonicProfile kGear2{
    {1.0, 0.55, 0.25},
    {{{0.0, std::numbers::pi / 2, std::numbers::pi / 4}, {0.5, 1.2, 2.0}, {1.0, 0.3, 2.5}}}};
const HarmonicProfile kGear3{
    {1.0, 0.25, 0.55},
    {{{0.0, std::numbers::pi / 2, std::numbers::pi / 4}, {2.1, 0.1, 0.8}, {0.2, 1.9, 0.4}}}};

std::string real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void SynthSpec::validate() const {
    if (cycles_per_gear == 0 || skiers == 0) throw std::invalid_argument("synth: cycles and skiers must be positive");
    if (!(intensity_min > 0.0 && intensity_max >= intensity_min)) {
        throw std::invalid_argument("synth: intensity range must be positive and ordered");
    }
    if (!(frequency_min > 0.0 && frequency_max >= frequency_min)) {
        throw std::invalid_argument("synth: frequency range must be positive and ordered");
    }
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw std::invalid_argument("synth: noise std must be >= 0");
    if (!(sample_rate > 0.0)) throw std::invalid_argument("synth: sample rate must be positive");
    if (frequency_max * 2.0 > sample_rate) throw std::invalid_argument("synth: cycle frequency above Nyquist");
}

KeyValues SynthSpec::to_key_values() const {
    return {{"cycles_per_gear", std::to_string(cycles_per_gear)},
            {"skiers", std::to_string(skiers)},
            {"intensity_min", real(intensity_min)},
            {"intensity_max", real(intensity_max)},
            {"frequency_min", real(frequency_min)},
            {"frequency_max", real(frequency_max)},
            {"noise_std", real(noise_std)},
            {"sample_rate", real(sample_rate)}};
}

const HarmonicProfile& gear_profile(int gear) {
    if (gear == kGearLow) return kGear2;
    if (gear == kGearHigh) return kGear3;
    throw std::invalid_argument("no harmonic profile for gear " + std::to_string(gear));
}

double gear_signal(int gear, std::size_t channel, double intensity, double frequency, double seconds) {
    const HarmonicProfile& p = gear_profile(gear);
    double v = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        v += intensity * p.amplitude[k] *
             std::sin(2.0 * std::numbers::pi * static_cast<double>(k + 1) * frequency * seconds + p.phase[k][channel]);
    }
    return v;
}

std::vector<Record> synth_generate(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> intensity(spec.intensity_min, spec.intensity_max);
    std::uniform_real_distribution<double> frequency(spec.frequency_min, spec.frequency_max);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<Record> out;
    std::int64_t t = 0;
    for (std::size_t s = 0; s < spec.skiers; ++s) {
        const double a = intensity(rng);
        // Whole cycles only: the period is rounded to an integer sample count.
        const auto period = static_cast<std::size_t>(std::max(2.0, std::round(spec.sample_rate / frequency(rng))));
        const double f = spec.sample_rate / static_cast<double>(period);
        for (int gear : {kGearLow, kGearHigh}) {
            for (std::size_t n = 0; n < spec.cycles_per_gear * period; ++n) {
                const double seconds = static_cast<double>(n) / spec.sample_rate;
                Record r;
                r.t = t++;
                r.gear = gear;
                double* axes[3] = {&r.ax, &r.ay, &r.az};
                for (std::size_t c = 0; c < 3; ++c) {
                    *axes[c] = gear_signal(gear, c, a, f, seconds);
                    if (spec.noise_std > 0.0) *axes[c] += spec.noise_std * noise(rng);
                }
                out.push_back(r);
            }
        }
    }
    return out;
}

}  // namespace gearnet
