#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fcdelay/spectrum.hpp"

using namespace fcdelay;

TEST_CASE("rescale maps [0,6] onto the symmetric grid")
{
    SampledResponse resp;
    resp.freqs = {0.0, 3.0, 6.0};
    resp.values = {cplx(1.0, 0.0), cplx(2.0, 3.0), cplx(0.5, -1.0)};
    const RescaledGrid g = rescale_and_symmetrize(resp);

    REQUIRE(g.size() == 5);
    CHECK(g.xs[0] == doctest::Approx(-0.5));
    CHECK(g.xs[1] == doctest::Approx(-0.25));
    CHECK(g.xs[2] == doctest::Approx(0.0));
    CHECK(g.xs[3] == doctest::Approx(0.25));
    CHECK(g.xs[4] == doctest::Approx(0.5));
    CHECK(g.scale_a == doctest::Approx(1.0 / 12.0));
    CHECK(g.includes_zero);

    CHECK(g.values[1] == std::conj(g.values[3]));
    CHECK(g.values[0] == std::conj(g.values[4]));
}

TEST_CASE("grid size is 2N-1 with a zero sample and 2N without")
{
    SampledResponse with_zero;
    SampledResponse without_zero;
    for (int i = 0; i < 10; ++i) {
        with_zero.freqs.push_back(static_cast<double>(i));
        with_zero.values.push_back(cplx(1.0, 0.0));
        without_zero.freqs.push_back(static_cast<double>(i + 1));
        without_zero.values.push_back(cplx(1.0, 0.0));
    }
    CHECK(rescale_and_symmetrize(with_zero).size() == 19);
    CHECK(rescale_and_symmetrize(without_zero).size() == 20);
}

TEST_CASE("conjugate value placement")
{
    SampledResponse resp;
    resp.freqs = {1.0, 2.0, 4.0};
    resp.values = {cplx(0.0, 0.5), cplx(2.0, 3.0), cplx(1.0, 1.0)};
    const RescaledGrid g = rescale_and_symmetrize(resp);
    // x = 0.25 holds 2+3i, so x = -0.25 holds 2-3i
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.xs[i] == doctest::Approx(-0.25))
            CHECK(g.values[i] == cplx(2.0, -3.0));
}

TEST_CASE("grid symmetry invariants")
{
    SampledResponse resp;
    resp.freqs = {0.5, 1.5, 2.5, 5.0};
    resp.values = {cplx(1, 2), cplx(3, -4), cplx(-2, 0.5), cplx(0.25, 0.125)};
    const RescaledGrid g = rescale_and_symmetrize(resp);

    CHECK(std::abs(g.xs.front()) == doctest::Approx(0.5));
    CHECK(std::abs(g.xs.back()) == doctest::Approx(0.5));
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(g.xs[i] == doctest::Approx(-g.xs[n - 1 - i]));
        CHECK(g.values[i].real() == doctest::Approx(g.values[n - 1 - i].real()));
        CHECK(g.values[i].imag() == doctest::Approx(-g.values[n - 1 - i].imag()));
    }
}

TEST_CASE("nonzero Im at w=0 is zeroed with a warning")
{
    SampledResponse resp;
    resp.freqs = {0.0, 1.0};
    resp.values = {cplx(1.0, 0.25), cplx(1.0, 1.0)};
    const RescaledGrid g = rescale_and_symmetrize(resp);
    REQUIRE(!g.warnings.empty());
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.xs[i] == 0.0)
            CHECK(g.values[i].imag() == 0.0);
}

TEST_CASE("bad inputs are rejected")
{
    SampledResponse resp;
    resp.freqs = {1.0, 1.0, 2.0};
    resp.values = {cplx(1, 0), cplx(1, 0), cplx(1, 0)};
    CHECK_THROWS_AS(rescale_and_symmetrize(resp), std::invalid_argument);

    SampledResponse single;
    single.freqs = {1.0};
    single.values = {cplx(1, 0)};
    CHECK_THROWS_AS(rescale_and_symmetrize(single), std::invalid_argument);
}

TEST_CASE("unscale_delay")
{
    CHECK(unscale_delay(0.0, 0.123) == 0.0);
    CHECK(unscale_delay(3.0, 1.0 / 12.0) == doctest::Approx(0.25));
    const double t_max = 4.0 * 3.14159265358979323846;
    CHECK(unscale_delay(t_max, 0.025) == doctest::Approx(t_max * 0.025));
}
