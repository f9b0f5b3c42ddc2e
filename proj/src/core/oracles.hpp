#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "core/elliptical.hpp"

namespace ecrisk {

struct TheoreticalCoefficients {
  double eta = 1.0;
  double ell = 1.0;
  Family family;
  double m_x = 0.0;
};

/// Closed-form (eta, ell(x)) for the Gaussian, Student, UGM and Slash rows.
TheoreticalCoefficients table1_coefficients(const Family& family, std::size_t N, double m_x);

/// Normalized generator c_N g_N(t) in dimension N.
double generator_value(const Family& family, std::size_t N, double t);

/// ell(x) from the generic tail-index formula fed with the exact generator.
/// Heavy-tailed families only.
double ell_from_generator(const Family& family, std::size_t N, double m_x);

/// sqrt((nu + M) / (nu + N)): scale of Y | X = x for a standardized Student model.
double student_conditional_scale(double nu, std::size_t N, double m_x);
double student_conditional_quantile(double nu, std::size_t N, double m_x, double alpha);
/// Same at level 1 - tail, accurate for tiny tails.
double student_conditional_quantile_upper(double nu, std::size_t N, double m_x, double tail);
double student_conditional_tvar(double nu, std::size_t N, double m_x, double alpha);
double student_conditional_tvar_upper(double nu, std::size_t N, double m_x, double tail);

/// Univariate law given by its density. location and scale only guide the
/// quadrature partition and bracketing; tail_index enables moment checks.
struct UnivariateLaw {
  std::function<double(double)> pdf;
  double location = 0.0;
  double scale = 1.0;
  std::optional<double> tail_index;
};

/// Law of Y | X = x under a Student model with mu_Y|X = 0: a scaled t_{nu+N}.
UnivariateLaw student_conditional_law(double nu, std::size_t N, double m_x);

/// Shifted copy of a law.
UnivariateLaw shift_law(const UnivariateLaw& law, double shift);

/// P(Z > z) and E[(Z - z)_+^r] by quadrature.
double numeric_upper_moment(const UnivariateLaw& law, double z, double r);
double numeric_lower_moment(const UnivariateLaw& law, double z, double r);

double numeric_quantile(const UnivariateLaw& law, double alpha);
/// Lp-quantile from the first-order condition by bracketed root finding.
double numeric_lp_quantile(const UnivariateLaw& law, double alpha, double p);
/// Haezendonck-Goovaerts measure for phi(t) = t^p by minimizing z + h(z).
double numeric_hg(const UnivariateLaw& law, double alpha, double p);

}  // namespace ecrisk
