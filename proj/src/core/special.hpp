#pragma once

// Special functions used by the estimators and the oracles: gamma ratios,
// digamma, beta, regularized incomplete beta/gamma and the Student t law.

namespace ecrisk::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

double log_gamma(double x);

/// Gamma(a) / Gamma(b), evaluated in log space.
double gamma_ratio(double a, double b);

double digamma(double x);

double log_beta(double a, double b);
double beta(double a, double b);

/// Regularized incomplete beta I_x(a, b).
double ibeta(double a, double b, double x);

/// 1 - I_x(a, b), without cancellation when I_x is close to one.
double ibetac(double a, double b, double x);

/// Solves I_x(a, b) = p for x in [0, 1].
double ibeta_inv(double a, double b, double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

double student_pdf(double nu, double t);
double student_cdf(double nu, double t);
/// P(T > t).
double student_sf(double nu, double t);
double student_quantile(double nu, double alpha);
/// Quantile at level 1 - tail; accurate for tail far below machine epsilon.
double student_quantile_upper(double nu, double tail);

}  // namespace ecrisk::special
