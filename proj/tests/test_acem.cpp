#include <doctest.h>

#include "emtk/acem.hpp"
#include "emtk/error.hpp"

using namespace emtk;

namespace {

CurrentWaveform two_level(double jp, double tp, double jm, double tm)
{
    CurrentWaveform w;
    w.period = tp + tm;
    w.intervals = {{tp, jp}, {tm, jm}};
    return w;
}

}  // namespace

TEST_CASE("directional averages of a two-level waveform")
{
    const auto w = two_level(2e10, 1e-9, -1e10, 1e-9);
    const auto a = directional_averages(w);
    CHECK(a.plus == doctest::Approx(1e10));
    CHECK(a.minus == doctest::Approx(5e9));
}

TEST_CASE("effective densities with partial recovery")
{
    const DirectionalAverages a{1e10, 5e9};
    const auto e = effective_densities(a, 0.7);
    CHECK(e.left_raw == doctest::Approx(1e10 - 0.7 * 5e9));
    CHECK(e.right_raw == doctest::Approx(5e9 - 0.7 * 1e10));
    CHECK(e.left == e.left_raw);
    CHECK(e.right == 0.0);
    CHECK(e.right_raw < 0.0);

    const auto none = effective_densities(a, 0.0);
    CHECK(none.left == a.plus);
    CHECK(none.right == a.minus);

    const auto full = effective_densities(DirectionalAverages{3e9, 3e9}, 1.0);
    CHECK(full.left == 0.0);
    CHECK(full.right == 0.0);
}

TEST_CASE("effective densities scale with the waveform")
{
    for (double k : {0.5, 2.0, 10.0}) {
        const auto a = directional_averages(two_level(3e10, 2e-9, -1e10, 3e-9));
        const auto b = directional_averages(two_level(k * 3e10, 2e-9, -k * 1e10, 3e-9));
        const auto ea = effective_densities(a, 0.4);
        const auto eb = effective_densities(b, 0.4);
        CHECK(eb.left == doctest::Approx(k * ea.left).epsilon(1e-12));
        CHECK(eb.right == doctest::Approx(k * ea.right).epsilon(1e-12));
    }
}

TEST_CASE("unidirectional waveform has nothing to recover")
{
    const auto a = directional_averages(two_level(2e10, 1e-9, 0.0, 3e-9));
    CHECK(a.minus == 0.0);
    const auto e = effective_densities(a, 0.9);
    CHECK(e.left == doctest::Approx(5e9));
    CHECK(e.right == 0.0);
}

TEST_CASE("recovery factor outside [0, 1] is rejected")
{
    CHECK_THROWS_AS(effective_densities(DirectionalAverages{1.0, 1.0}, -0.1), InputError);
    CHECK_THROWS_AS(effective_densities(DirectionalAverages{1.0, 1.0}, 1.1), InputError);
}
