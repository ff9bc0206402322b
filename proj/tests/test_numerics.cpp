#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cmc/numerics.hpp"

using namespace cmc;

TEST_CASE("fd_weights reproduces classic stencils") {
    // Centered 3-point second derivative.
    auto w = fd_weights(0.0, {-1.0, 0.0, 1.0}, 2);
    CHECK_THAT(w[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(w[1], Catch::Matchers::WithinAbs(-2.0, 1e-12));
    CHECK_THAT(w[2], Catch::Matchers::WithinAbs(1.0, 1e-12));
    // Centered 5-point second derivative.
    auto w5 = fd_weights(0.0, {-2.0, -1.0, 0.0, 1.0, 2.0}, 2);
    CHECK_THAT(w5[0], Catch::Matchers::WithinAbs(-1.0 / 12.0, 1e-12));
    CHECK_THAT(w5[2], Catch::Matchers::WithinAbs(-30.0 / 12.0, 1e-12));
}

TEST_CASE("fd_weights differentiates smooth functions at high order") {
    const double h = 0.01;
    std::vector<double> xs;
    for (int k = 0; k < 6; ++k) xs.push_back(k * h);
    auto w = fd_weights(0.0, xs, 2);  // one-sided 6-point second derivative, 4th order
    double acc = 0.0;
    for (int k = 0; k < 6; ++k) acc += w[k] * std::sin(1.0 + xs[k]);
    CHECK_THAT(acc, Catch::Matchers::WithinAbs(-std::sin(1.0), 1e-7));
}

TEST_CASE("quintic Hermite is exact on quintics") {
    auto f = [](double x) { return ((x - 2.0) * x + 3.0) * x * x * x - 1.0; };
    auto fd = [](double x) { return ((5.0 * x - 8.0) * x + 9.0) * x * x; };
    auto fdd = [](double x) { return ((20.0 * x - 24.0) * x + 18.0) * x; };
    const double h = 0.7;
    QuinticHermite q{f(0.0), fd(0.0), fdd(0.0), f(h), fd(h), fdd(h), h};
    for (double t : {0.1, 0.33, 0.5, 0.9}) {
        CHECK_THAT(q.value(t), Catch::Matchers::WithinAbs(f(t * h), 1e-12));
        CHECK_THAT(q.derivative(t), Catch::Matchers::WithinAbs(fd(t * h), 1e-11));
    }
}

TEST_CASE("fit_line recovers exact lines and reports R^2") {
    std::vector<double> x{1, 2, 3, 4, 5}, y;
    for (double v : x) y.push_back(3.0 * v - 2.0);
    const LineFit f = fit_line(x, y);
    CHECK_THAT(f.slope, Catch::Matchers::WithinAbs(3.0, 1e-14));
    CHECK_THAT(f.intercept, Catch::Matchers::WithinAbs(-2.0, 1e-13));
    CHECK_THAT(f.r_squared, Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("find_root brackets and converges") {
    const double r = find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    CHECK_THAT(r, Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-12));
    CHECK_THROWS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0));
}
