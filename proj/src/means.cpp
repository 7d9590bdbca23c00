#include "ricci/means.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <string>

#include "ricci/error.hpp"

namespace ricci {

namespace {

void check_nonnegative(double s, double t) {
    if (!(s >= 0.0) || !(t >= 0.0))
        fail(ErrorCode::NegativeInput, "log mean arguments must be nonnegative, got (" + std::to_string(s) + ", " +
                                           std::to_string(t) + ")");
}

// Writing s = E e^z, t = E e^{-z} gives theta = E S(z) with S(z) = sinh(z)/z.
// Below this |z| the Taylor series of S is used instead of the quotient.
constexpr double kSeriesRadius = 0.5;

struct SinhcJet {
    double s0, s1, s2;  // S, S', S''
};

SinhcJet sinhc_series(double z) {
    const double z2 = z * z;
    double s0 = 1.0, s1 = 0.0, s2 = 0.0;
    double prev = 1.0;  // z^{2k-2}
    double fact = 1.0;  // (2k+1)!
    for (int k = 1; k < 12; ++k) {
        fact *= double(2 * k) * double(2 * k + 1);
        s1 += 2.0 * k * prev * z / fact;
        s2 += 2.0 * k * (2.0 * k - 1.0) * prev / fact;
        prev *= z2;
        s0 += prev / fact;
    }
    return {s0, s1, s2};
}

}  // namespace

double theta(double s, double t) {
    check_nonnegative(s, t);
    if (s == 0.0 || t == 0.0) return 0.0;
    if (s == t) return s;
    const double z = 0.5 * std::log(s / t);
    if (std::abs(z) < kSeriesRadius) {
        const double e = std::sqrt(s) * std::sqrt(t);
        return e * sinhc_series(z).s0;
    }
    return (s - t) / (2.0 * z);
}

MeanJet log_mean_jet(double s, double t) {
    check_nonnegative(s, t);
    if (s == 0.0 || t == 0.0)
        fail(ErrorCode::BoundaryDerivative, "partials of theta are undefined on the boundary");
    const double z = 0.5 * std::log(s / t);
    double es0, es1, es2;  // E*S, E*S', E*S''
    if (std::abs(z) < kSeriesRadius) {
        const double e = std::sqrt(s) * std::sqrt(t);
        const SinhcJet j = sinhc_series(z);
        es0 = e * j.s0;
        es1 = e * j.s1;
        es2 = e * j.s2;
    } else {
        const double half_diff = 0.5 * (s - t);
        const double half_sum = 0.5 * (s + t);
        es0 = half_diff / z;
        es1 = (z * half_sum - half_diff) / (z * z);
        es2 = ((z * z + 2.0) * half_diff - 2.0 * z * half_sum) / (z * z * z);
    }
    // Derivatives in logarithmic coordinates a = log s, b = log t.
    const double ta = 0.5 * (es0 + es1);
    const double tb = 0.5 * (es0 - es1);
    const double taa = 0.25 * (es0 + 2.0 * es1 + es2);
    const double tbb = 0.25 * (es0 - 2.0 * es1 + es2);
    const double tab = 0.25 * (es0 - es2);
    MeanJet out;
    out.value = es0;
    out.d1 = ta / s;
    out.d2 = tb / t;
    out.d11 = (taa - ta) / (s * s);
    out.d22 = (tbb - tb) / (t * t);
    out.d12 = tab / (s * t);
    return out;
}

MeanEvaluation log_mean(double s, double t) {
    check_nonnegative(s, t);
    MeanEvaluation out;
    if (s == 0.0 || t == 0.0) return out;
    const MeanJet j = log_mean_jet(s, t);
    out.value = j.value;
    out.d1 = j.d1;
    out.d2 = j.d2;
    out.has_derivatives = true;
    return out;
}

double alpha_cost(double x, double s, double t) {
    const double th = theta(s, t);
    if (th == 0.0) return x == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return x * x / th;
}

double theta_constant_integrand(double r, MeanKind kind) {
    const double s = 1.0 - std::abs(r);
    const double t = 1.0 + std::abs(r);
    const double th = kind == MeanKind::Arithmetic ? 0.5 * (s + t) : theta(s, t);
    return 1.0 / std::sqrt(2.0 * th);
}

double theta_constant_c(MeanKind kind) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    // The second argument is the signed distance to the nearest endpoint, which
    // keeps 1 - |r| accurate where theta vanishes.
    auto f = [kind](double x, double xc) {
        const double s = std::abs(xc);
        const double t = 2.0 - s;
        (void)x;
        const double th = kind == MeanKind::Arithmetic ? 0.5 * (s + t) : theta(s, t);
        return 1.0 / std::sqrt(2.0 * th);
    };
    double error = 0.0;
    double l1 = 0.0;
    const double value = integrator.integrate(f, 1e-14, &error, &l1);
    if (!std::isfinite(value) || error > 1e-8)
        fail(ErrorCode::QuadratureFail, "tanh-sinh error estimate " + std::to_string(error));
    return value;
}

}  // namespace ricci
