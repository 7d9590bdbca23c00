#include <doctest.h>

#include <cmath>

#include "ricci/error.hpp"
#include "ricci/means.hpp"

using namespace ricci;

// Oracle values from 30-digit mpmath evaluation of (s - t) / (log s - log t).
TEST_CASE("theta matches high precision oracle values") {
    CHECK(theta(2.0, 1.0) == doctest::Approx(1.442695040888963407).epsilon(1e-15));
    CHECK(theta(3.0, 0.5) == doctest::Approx(1.395276566378118134).epsilon(1e-15));
    CHECK(theta(1.0, 1.0) == 1.0);
    CHECK(theta(0.25, 0.25) == 0.25);
}

TEST_CASE("theta is symmetric, homogeneous and between geometric and arithmetic means") {
    const double pts[][2] = {{0.1, 3.0}, {2.0, 2.0 + 1e-9}, {1e-8, 1.0}, {5.0, 0.7}};
    for (const auto& p : pts) {
        const double s = p[0], t = p[1];
        CHECK(theta(s, t) == doctest::Approx(theta(t, s)).epsilon(1e-15));
        CHECK(theta(3.5 * s, 3.5 * t) == doctest::Approx(3.5 * theta(s, t)).epsilon(1e-14));
        CHECK(theta(s, t) >= std::sqrt(s * t) * (1 - 1e-14));
        CHECK(theta(s, t) <= 0.5 * (s + t) * (1 + 1e-14));
    }
}

TEST_CASE("theta is continuous across the series switch near the diagonal") {
    // theta(1 + a, 1) = a / log1p(a), evaluated without cancellation.
    for (double a : {1e-12, 1e-9, 1e-6, 1e-4}) {
        const double expect = a / std::log1p(a);
        CHECK(theta(1.0 + a, 1.0) == doctest::Approx(expect).epsilon(1e-14));
    }
    // Around |log(s/t)| = 1, the switch point, both branches must agree with the closed form.
    for (double r : {std::exp(0.999), std::exp(1.001)}) {
        const double closed = (r - 1.0) / std::log(r);
        CHECK(theta(r, 1.0) == doctest::Approx(closed).epsilon(1e-14));
    }
}

TEST_CASE("theta boundary and domain") {
    CHECK(theta(0.0, 1.0) == 0.0);
    CHECK(theta(2.0, 0.0) == 0.0);
    CHECK(theta(0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(theta(-1.0, 1.0), Error);
    try {
        theta(1.0, -0.5);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NegativeInput);
    }
}

TEST_CASE("log_mean reports partials only in the open quadrant") {
    const MeanEvaluation in = log_mean(2.0, 1.0);
    CHECK(in.has_derivatives);
    // d1 theta(s,t) = (theta - theta^2 / s) / (s - t)
    const double th = theta(2.0, 1.0);
    CHECK(in.d1 == doctest::Approx((th - th * th / 2.0) / 1.0).epsilon(1e-13));
    CHECK(in.d2 == doctest::Approx((th * th / 1.0 - th) / 1.0).epsilon(1e-13));
    const MeanEvaluation edge = log_mean(0.0, 1.0);
    CHECK_FALSE(edge.has_derivatives);
    CHECK(edge.value == 0.0);
}

TEST_CASE("log_mean_jet second derivatives at the diagonal") {
    const MeanJet j = log_mean_jet(1.0, 1.0);
    CHECK(j.value == 1.0);
    CHECK(j.d1 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(j.d2 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(j.d11 == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
    CHECK(j.d12 == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(j.d22 == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
    CHECK_THROWS_AS(log_mean_jet(0.0, 1.0), Error);
}

TEST_CASE("log_mean_jet agrees with finite differences off the diagonal") {
    const double s = 0.7, t = 2.3, h = 1e-5;
    const MeanJet j = log_mean_jet(s, t);
    CHECK(j.d1 == doctest::Approx((theta(s + h, t) - theta(s - h, t)) / (2 * h)).epsilon(1e-8));
    CHECK(j.d2 == doctest::Approx((theta(s, t + h) - theta(s, t - h)) / (2 * h)).epsilon(1e-8));
    const double d11 = (theta(s + h, t) - 2 * theta(s, t) + theta(s - h, t)) / (h * h);
    CHECK(j.d11 == doctest::Approx(d11).epsilon(1e-4));
    const double d12 =
        (theta(s + h, t + h) - theta(s + h, t - h) - theta(s - h, t + h) + theta(s - h, t - h)) / (4 * h * h);
    CHECK(j.d12 == doctest::Approx(d12).epsilon(1e-4));
    // Euler relation for a 1-homogeneous function: s d1 + t d2 = theta.
    CHECK(s * j.d1 + t * j.d2 == doctest::Approx(j.value).epsilon(1e-13));
}

TEST_CASE("alpha_cost conventions") {
    CHECK(alpha_cost(0.0, 0.0, 0.0) == 0.0);
    CHECK(std::isinf(alpha_cost(1.0, 0.0, 0.0)));
    CHECK(alpha_cost(2.0, 2.0, 1.0) == doctest::Approx(4.0 / theta(2.0, 1.0)));
}

TEST_CASE("theta constant matches the quadrature oracle") {
    // mpmath: 1.55870745145365931898815171425
    const double c = theta_constant_c();
    CHECK(c == doctest::Approx(1.558707451453659).epsilon(1e-12));
    CHECK(std::abs(c - 1.56) <= 0.01);
    // Arithmetic mean: int dr / sqrt(2) over [-1, 1] = sqrt(2).
    CHECK(theta_constant_c(MeanKind::Arithmetic) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(theta_constant_integrand(0.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}
