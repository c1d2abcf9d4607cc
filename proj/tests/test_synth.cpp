#include "doctest.h"
#include "gearnet/data.hpp"
#include "gearnet/synth.hpp"

#include <cmath>
#include <numbers>

using namespace gearnet;

TEST_SUITE("synth") {

TEST_CASE("noise-free stream is the harmonic sum") {
    SynthSpec spec;
    spec.skiers = 1;
    spec.cycles_per_gear = 1;
    spec.noise_std = 0.0;
    const auto r = synth_generate(spec, 5);
    REQUIRE(r.size() % 2 == 0);
    const std::size_t period = r.size() / 2;
    const double f = 50.0 / static_cast<double>(period);
    CHECK(f >= 0.68);
    CHECK(f <= 1.42);

    // recover the skier's intensity from one sample, then check every sample
    const auto value = [&](int gear, std::size_t ch, double amp, double sec) {
        const auto& prof = gear_profile(gear);
        double v = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
            v += amp * prof.amplitude[k] *
                 std::sin(2.0 * std::numbers::pi * static_cast<double>(k + 1) * f * sec + prof.phase[k][ch]);
        return v;
    };
    const double unit = value(2, 0, 1.0, 3.0 / 50.0);
    REQUIRE(std::abs(unit) > 1e-3);
    const double amp = r[3].ax / unit;
    CHECK(amp >= 0.5);
    CHECK(amp <= 2.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const int gear = i < period ? 2 : 3;
        const double sec = static_cast<double>(i % period) / 50.0;
        CHECK(r[i].gear == gear);
        CHECK(r[i].t == static_cast<std::int64_t>(i));
        CHECK(r[i].ax == doctest::Approx(value(gear, 0, amp, sec)).epsilon(1e-12));
        CHECK(r[i].ay == doctest::Approx(value(gear, 1, amp, sec)).epsilon(1e-12));
        CHECK(r[i].az == doctest::Approx(value(gear, 2, amp, sec)).epsilon(1e-12));
        CHECK(r[i].ax == gear_signal(gear, 0, amp, f, sec));
    }
}

TEST_CASE("gear profiles differ only in shape") {
    const auto& a = gear_profile(2);
    const auto& b = gear_profile(3);
    CHECK((a.amplitude != b.amplitude || a.phase != b.phase));
    CHECK_THROWS(gear_profile(4));
}

TEST_CASE("determinism and balance") {
    SynthSpec spec;
    spec.skiers = 3;
    spec.cycles_per_gear = 5;
    const auto a = synth_generate(spec, 42), b = synth_generate(spec, 42), c = synth_generate(spec, 43);
    CHECK(format_csv(a) == format_csv(b));
    CHECK(format_csv(a) != format_csv(c));
    std::size_t low = 0;
    for (const auto& r : a) low += r.gear == 2;
    CHECK(2 * low == a.size());
}

TEST_CASE("spec validation") {
    SynthSpec s;
    s.noise_std = -1.0;
    CHECK_THROWS(s.validate());
    s = {};
    s.frequency_min = 2.0;
    s.frequency_max = 1.0;
    CHECK_THROWS(s.validate());
    s = {};
    s.skiers = 0;
    CHECK_THROWS(s.validate());
    s = {};
    s.intensity_min = 0.0;
    CHECK_THROWS(s.validate());
}

TEST_CASE("default spec yields about 2000 training windows") {
    const auto ds = prepare_dataset(synth_generate(SynthSpec{}, 1));
    CHECK(ds.train.size() >= 1950);
    CHECK(ds.train.size() <= 2050);
}

}  // TEST_SUITE
