#pragma once

namespace ricci {

// Logarithmic mean theta(s,t) with first partials. Partials are only defined
// on the open quadrant; `has_derivatives` is false when s or t is zero.
struct MeanEvaluation {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    bool has_derivatives = false;
};

// Value, gradient and Hessian of theta at a point of the open quadrant.
struct MeanJet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d11 = 0.0;
    double d12 = 0.0;
    double d22 = 0.0;
};

enum class MeanKind { Logarithmic, Arithmetic };

// theta(s,t); 0 on the boundary of the quadrant. Throws NegativeInput.
double theta(double s, double t);

MeanEvaluation log_mean(double s, double t);

// Throws BoundaryDerivative if s or t is zero.
MeanJet log_mean_jet(double s, double t);

// x^2/theta(s,t), with the conventions 0 for (0, theta=0) and +inf for (x != 0, theta=0).
double alpha_cost(double x, double s, double t);

// c = int_{-1}^{1} dr / sqrt(2 theta(1-r,1+r)). Throws QuadratureFail.
double theta_constant_c(MeanKind kind = MeanKind::Logarithmic);

// Integrand of theta_constant_c at r in (-1,1).
double theta_constant_integrand(double r, MeanKind kind = MeanKind::Logarithmic);

}  // namespace ricci
