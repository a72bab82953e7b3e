#include "combcavity/errors.hpp"
#include "combcavity/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace combcav;
using namespace combcav::numerics;

TEST_CASE("pchip reproduces nodes and flat runs")
{
    Pchip p({0.0, 1.0, 2.0, 3.0, 4.0}, {0.3, 0.3, 0.3, 1.0, 1.0});
    CHECK(p(0.0) == 0.3);
    CHECK(p(3.0) == 1.0);
    for (double x = 0.0; x <= 2.0; x += 0.125)
        CHECK(p(x) == 0.3);
    CHECK(p.derivative(0.5) == 0.0);
}

TEST_CASE("pchip stays monotone on monotone data")
{
    Pchip p({0.0, 1.0, 1.5, 4.0, 5.0}, {0.0, 0.1, 2.0, 2.1, 7.0});
    double prev = p(0.0);
    for (double x = 0.01; x <= 5.0; x += 0.01)
    {
        const double y = p(x);
        CHECK(y >= prev - 1e-14);
        prev = y;
    }
}

TEST_CASE("pchip is exact on straight lines")
{
    Pchip p({1.0, 2.0, 4.0, 7.0}, {3.0, 5.0, 9.0, 15.0});
    CHECK(p(3.3) == doctest::Approx(7.6).epsilon(1e-14));
    CHECK(p.derivative(5.5) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive simpson")
{
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_simpson([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-12) ==
          doctest::Approx(std::sqrt(M_PI)).epsilon(1e-11));
    CHECK_THROWS_AS(adaptive_simpson([](double x) { return 1.0 / x; }, -1.0, 1.0, 1e-12, 8), QuadratureError);
}

TEST_CASE("golden section and bisection")
{
    CHECK(golden_section_max([](double x) { return -(x - 0.7) * (x - 0.7); }, 0.0, 2.0, 1e-12) ==
          doctest::Approx(0.7).epsilon(1e-9));
    CHECK(bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), NumericError);
}
