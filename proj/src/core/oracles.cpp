#include "core/oracles.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "core/error.hpp"
#include "core/extremal.hpp"
#include "core/special.hpp"

namespace ecrisk {

namespace {

using special::kPi;

void check_m_x(double m_x) {
  if (!(m_x >= 0.0) || !std::isfinite(m_x)) throw DomainError("M(x) must be finite and nonnegative");
}

}  // namespace

double generator_value(const Family& family, std::size_t N, double t) {
  validate_family(family);
  check_m_x(t);
  const double n = static_cast<double>(N);
  const double gauss_norm = std::pow(2.0 * kPi, -0.5 * n);
  if (std::holds_alternative<GaussianFamily>(family)) return gauss_norm * std::exp(-0.5 * t);
  if (const auto* s = std::get_if<StudentFamily>(&family)) {
    const double nu = s->nu;
    const double log_c = special::log_gamma(0.5 * (nu + n)) - special::log_gamma(0.5 * nu) -
                         0.5 * n * std::log(nu * kPi);
    return std::exp(log_c - 0.5 * (nu + n) * std::log1p(t / nu));
  }
  if (const auto* u = std::get_if<UgmFamily>(&family)) {
    double sum = 0.0;
    for (std::size_t k = 0; k < u->weights.size(); ++k) {
      const double theta = u->rates[k];
      sum += u->weights[k] * std::pow(theta, n) * std::exp(-0.5 * theta * theta * t);
    }
    return gauss_norm * sum;
  }
  const double a = std::get<SlashFamily>(family).a;
  if (t == 0.0) return gauss_norm * a / (a + n);
  const double s = 0.5 * (a + n);
  return a * gauss_norm * 0.5 *
         std::exp(s * std::log(2.0 / t) + special::log_gamma(s)) * special::gamma_p(s, 0.5 * t);
}

TheoreticalCoefficients table1_coefficients(const Family& family, std::size_t N, double m_x) {
  validate_family(family);
  check_m_x(m_x);
  const double n = static_cast<double>(N);
  TheoreticalCoefficients out;
  out.family = family;
  out.m_x = m_x;
  if (std::holds_alternative<GaussianFamily>(family)) return out;
  if (const auto* s = std::get_if<StudentFamily>(&family)) {
    const double nu = s->nu;
    out.eta = n / nu + 1.0;
    const double log_ratio = special::log_gamma(0.5 * (nu + n + 1.0)) + special::log_gamma(0.5 * nu) -
                             special::log_gamma(0.5 * (nu + n)) - special::log_gamma(0.5 * (nu + 1.0));
    out.ell = std::exp(log_ratio + 0.5 * (n + nu) * std::log1p(m_x / nu) +
                       (0.5 * n + 1.0) * std::log(nu)) /
              (nu + n);
    return out;
  }
  if (const auto* u = std::get_if<UgmFamily>(&family)) {
    const double m = *std::min_element(u->rates.begin(), u->rates.end());
    double denom = 0.0;
    for (std::size_t k = 0; k < u->weights.size(); ++k) {
      const double theta = u->rates[k];
      // Factor out the slowest exponential to avoid underflow at large M(x).
      denom += u->weights[k] * std::pow(theta / m, n) * std::exp(-0.5 * (theta * theta - m * m) * m_x);
    }
    out.eta = 1.0;
    out.ell = 1.0 / denom;
    return out;
  }
  const double a = std::get<SlashFamily>(family).a;
  if (!(m_x > 0.0)) throw DomainError("slash coefficients require M(x) > 0");
  out.eta = n / a + 1.0;
  const double s = 0.5 * (n + a);
  const double log_num = special::log_gamma(0.5 * (n + 1.0 + a)) + s * std::log(m_x);
  const double log_den = special::log_gamma(s) + std::log(n + a) + std::log(special::gamma_p(s, 0.5 * m_x)) +
                         (0.5 * a - 1.0) * std::log(2.0) + special::log_gamma(0.5 * (1.0 + a));
  out.ell = std::exp(log_num - log_den);
  return out;
}

double ell_from_generator(const Family& family, std::size_t N, double m_x) {
  const auto gamma = family_tail_index(family);
  if (!gamma) throw DomainError("ell_from_generator: family " + family_name(family) + " is not heavy tailed");
  return estimate_ell(*gamma, generator_value(family, N, m_x), N);
}

double student_conditional_scale(double nu, std::size_t N, double m_x) {
  if (!(nu > 0.0)) throw DomainError("student oracle: nu must be positive");
  check_m_x(m_x);
  const double n = static_cast<double>(N);
  return std::sqrt((nu + m_x) / (nu + n));
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "level alpha must lie in (0, 1), got " << alpha;
    throw DomainError(msg.str());
  }
}

double tvar_from_standard_quantile(double nu, std::size_t N, double m_x, double tail, double q_t) {
  const double n = static_cast<double>(N);
  const double df = nu + n;
  if (!(df > 1.0)) throw DomainError("student TVaR requires nu + N > 1");
  const double log_ratio = special::log_gamma(0.5 * (df + 1.0)) - special::log_gamma(0.5 * df);
  const double body = std::exp(log_ratio + 0.5 * (1.0 - df) * std::log1p(q_t * q_t / df));
  return body * std::sqrt(nu + m_x) / (std::sqrt(kPi) * (df - 1.0)) / tail;
}

}  // namespace

double student_conditional_quantile(double nu, std::size_t N, double m_x, double alpha) {
  check_alpha(alpha);
  const double scale = student_conditional_scale(nu, N, m_x);
  return scale * special::student_quantile(nu + static_cast<double>(N), alpha);
}

double student_conditional_quantile_upper(double nu, std::size_t N, double m_x, double tail) {
  check_alpha(tail);
  const double scale = student_conditional_scale(nu, N, m_x);
  return scale * special::student_quantile_upper(nu + static_cast<double>(N), tail);
}

double student_conditional_tvar(double nu, std::size_t N, double m_x, double alpha) {
  check_alpha(alpha);
  student_conditional_scale(nu, N, m_x);
  const double q_t = special::student_quantile(nu + static_cast<double>(N), alpha);
  return tvar_from_standard_quantile(nu, N, m_x, 1.0 - alpha, q_t);
}

double student_conditional_tvar_upper(double nu, std::size_t N, double m_x, double tail) {
  check_alpha(tail);
  student_conditional_scale(nu, N, m_x);
  const double q_t = special::student_quantile_upper(nu + static_cast<double>(N), tail);
  return tvar_from_standard_quantile(nu, N, m_x, tail, q_t);
}

UnivariateLaw student_conditional_law(double nu, std::size_t N, double m_x) {
  const double scale = student_conditional_scale(nu, N, m_x);
  const double df = nu + static_cast<double>(N);
  UnivariateLaw law;
  law.pdf = [scale, df](double z) { return special::student_pdf(df, z / scale) / scale; };
  law.location = 0.0;
  law.scale = scale;
  law.tail_index = 1.0 / df;
  return law;
}

UnivariateLaw shift_law(const UnivariateLaw& law, double shift) {
  UnivariateLaw out = law;
  out.pdf = [pdf = law.pdf, shift](double z) { return pdf(z - shift); };
  out.location = law.location + shift;
  return out;
}

namespace {

constexpr double kQuadTol = 1e-11;

template <class F>
double finite_integral(const F& g, double a, double b, double loc, double scale) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a, b};
  if (loc > a && loc < b) cuts.push_back(loc);
  for (double step = scale; step < 2.0 * (b - a) + scale; step *= 2.0) {
    for (double c : {loc - step, loc + step})
      if (c > a && c < b) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, cuts[i], cuts[i + 1], 15,
                                                                           kQuadTol);
  }
  return total;
}

// Integral of g over [a, inf): quadrature on [a, loc] then a double exponential
// rule on the half line with a width matched to the distance from the center.
template <class F>
double upper_integral(const F& g, double a, double loc, double scale) {
  double total = 0.0;
  double start = a;
  if (a < loc) {
    total += finite_integral(g, a, loc, loc, scale);
    start = loc;
  }
  const double width = std::max(scale, start - loc);
  auto mapped = [&](double u) {
    const double v = g(start + width * u) * width;
    return std::isfinite(v) ? v : 0.0;
  };
  boost::math::quadrature::exp_sinh<double> rule;
  total += rule.integrate(mapped, 0.0, std::numeric_limits<double>::infinity(), kQuadTol);
  return total;
}

void check_law(const UnivariateLaw& law) {
  if (!law.pdf) throw DomainError("univariate law has no density");
  if (!(law.scale > 0.0)) throw DomainError("univariate law scale must be positive");
}

UnivariateLaw mirror(const UnivariateLaw& law) {
  UnivariateLaw out = law;
  out.pdf = [pdf = law.pdf](double z) { return pdf(-z); };
  out.location = -law.location;
  return out;
}

void check_moment(const UnivariateLaw& law, double r, const char* what) {
  if (law.tail_index && r > 0.0 && !(r * *law.tail_index < 1.0)) {
    std::ostringstream msg;
    msg << what << ": moment of order " << r << " does not exist for tail index " << *law.tail_index;
    throw DomainError(msg.str());
  }
}

double upper_mass(const UnivariateLaw& law, double z) {
  return upper_integral([&](double t) { return law.pdf(t); }, z, law.location, law.scale);
}

struct RootTolerance {
  double floor;
  bool operator()(double a, double b) const {
    return std::fabs(a - b) <= 1e-14 * std::max({std::fabs(a), std::fabs(b), floor});
  }
};

}  // namespace

double numeric_upper_moment(const UnivariateLaw& law, double z, double r) {
  check_law(law);
  check_moment(law, r, "numeric_upper_moment");
  return upper_integral([&](double t) { return std::pow(t - z, r) * law.pdf(t); }, z, law.location,
                        law.scale);
}

double numeric_lower_moment(const UnivariateLaw& law, double z, double r) {
  return numeric_upper_moment(mirror(law), -z, r);
}

double numeric_quantile(const UnivariateLaw& law, double alpha) {
  check_law(law);
  check_alpha(alpha);
  if (alpha < 0.5) return -numeric_quantile(mirror(law), 1.0 - alpha);
  const double target = std::log1p(-alpha);
  auto g = [&](double z) { return std::log(upper_mass(law, z)) - target; };
  double lo = law.location;
  double hi = law.location + law.scale;
  double step = law.scale;
  for (int i = 0; g(lo) < 0.0; ++i) {
    if (i > 200) throw DomainError("numeric_quantile: cannot bracket the lower end");
    lo -= step;
    step *= 2.0;
  }
  step = law.scale;
  for (int i = 0; g(hi) > 0.0; ++i) {
    if (i > 200) throw DomainError("numeric_quantile: cannot bracket the upper end");
    hi += step;
    step *= 2.0;
  }
  std::uintmax_t iters = 300;
  const auto root = boost::math::tools::toms748_solve(g, lo, hi, RootTolerance{law.scale}, iters);
  return 0.5 * (root.first + root.second);
}

double numeric_lp_quantile(const UnivariateLaw& law, double alpha, double p) {
  check_law(law);
  check_alpha(alpha);
  if (!(p >= 1.0)) throw DomainError("numeric_lp_quantile: p must be >= 1");
  check_moment(law, p - 1.0, "numeric_lp_quantile");
  const double r = p - 1.0;
  auto g = [&](double z) {
    const double up = alpha * numeric_upper_moment(law, z, r);
    const double down = (1.0 - alpha) * numeric_lower_moment(law, z, r);
    return std::log(up) - std::log(down);
  };
  const double q = numeric_quantile(law, alpha);
  double lo = q;
  double hi = q;
  const double base_step = std::max(law.scale, 0.1 * std::fabs(q - law.location));
  double step = base_step;
  for (int i = 0; !(g(lo) > 0.0); ++i) {
    if (i > 200) throw DomainError("numeric_lp_quantile: no sign change below the quantile");
    lo -= step;
    step *= 2.0;
  }
  step = base_step;
  for (int i = 0; !(g(hi) < 0.0); ++i) {
    if (i > 200) throw DomainError("numeric_lp_quantile: no sign change above the quantile");
    hi += step;
    step *= 2.0;
  }
  std::uintmax_t iters = 300;
  const auto root = boost::math::tools::toms748_solve(g, lo, hi, RootTolerance{law.scale}, iters);
  return 0.5 * (root.first + root.second);
}

double numeric_hg(const UnivariateLaw& law, double alpha, double p) {
  check_law(law);
  check_alpha(alpha);
  if (!(p >= 1.0)) throw DomainError("numeric_hg: p must be >= 1");
  check_moment(law, p, "numeric_hg");
  const double tail = 1.0 - alpha;
  auto objective = [&](double z) {
    return z + std::pow(numeric_upper_moment(law, z, p) / tail, 1.0 / p);
  };
  const double q = numeric_quantile(law, alpha);
  const double iqr = numeric_quantile(law, 0.75) - numeric_quantile(law, 0.25);
  double lo = q - 5.0 * iqr;
  double hi = numeric_quantile(law, 1.0 - tail / 100.0);
  for (int attempt = 0; attempt <= 10; ++attempt) {
    std::uintmax_t iters = 500;
    const auto best = boost::math::tools::brent_find_minima(objective, lo, hi, 27, iters);
    const double width = hi - lo;
    const bool at_lo = best.first - lo < 1e-6 * width;
    const bool at_hi = hi - best.first < 1e-6 * width;
    if (!at_lo && !at_hi) return best.second;
    if (at_lo) lo -= width;
    if (at_hi) hi += width;
  }
  throw DomainError("numeric_hg: minimizer stays on the bracket boundary after 10 widenings");
}

}  // namespace ecrisk
