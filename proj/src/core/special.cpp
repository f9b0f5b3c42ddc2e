#include "core/special.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace ecrisk::special {
namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;
}

// Returns {I_x(a,b), 1 - I_x(a,b)} with y = 1 - x supplied by the caller so
// that neither tail loses precision.
struct BetaPair {
  double lower;
  double upper;
};

BetaPair ibeta_pair(double a, double b, double x, double y) {
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};
  const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    return {lower, 1.0 - lower};
  }
  const double upper = std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
  return {1.0 - upper, upper};
}

double beta_density(double a, double b, double x) {
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

// Root of I_x(a,b) = p, bisected in log x and polished by Newton steps.
double ibeta_inv_lower(double a, double b, double p) {
  double lo = std::log(1e-300);
  double hi = 0.0;
  if (ibeta(a, b, std::exp(lo)) >= p) return std::exp(lo);
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ibeta(a, b, std::exp(mid)) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = std::exp(0.5 * (lo + hi));
  for (int it = 0; it < 2; ++it) {
    const double dens = beta_density(a, b, x);
    if (!(dens > 0.0) || !std::isfinite(dens)) break;
    const double step = (ibeta(a, b, x) - p) / dens;
    const double next = x - step;
    if (!(next > 0.0 && next < 1.0)) break;
    x = next;
  }
  return x;
}

}  // namespace

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double gamma_ratio(double a, double b) { return std::exp(log_gamma(a) - log_gamma(b)); }

double digamma(double x) {
  if (x <= 0.0 && std::floor(x) == x) return std::numeric_limits<double>::quiet_NaN();
  if (x < 0.0) return digamma(1.0 - x) - kPi / std::tan(kPi * x);
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double series =
      f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
  return result + std::log(x) - 0.5 / x - series;
}

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

double beta(double a, double b) { return std::exp(log_beta(a, b)); }

double ibeta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("ibeta: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return ibeta_pair(a, b, x, 1.0 - x).lower;
}

double ibetac(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("ibetac: shape parameters must be positive");
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return ibeta_pair(a, b, x, 1.0 - x).upper;
}

double ibeta_inv(double a, double b, double p) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("ibeta_inv: shape parameters must be positive");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  if (p <= 0.5) return ibeta_inv_lower(a, b, p);
  return 1.0 - ibeta_inv_lower(b, a, 1.0 - p);
}

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  const double log_front = -x + a * std::log(x) - log_gamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < kMaxIter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(log_front);
  }
  // Continued fraction for Q(a, x).
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return 1.0 - std::exp(log_front) * h;
}

double student_pdf(double nu, double t) {
  if (!(nu > 0.0)) throw DomainError("student_pdf: degrees of freedom must be positive");
  const double log_norm =
      log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) - 0.5 * std::log(nu * kPi);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

double student_sf(double nu, double t) {
  if (!(nu > 0.0)) throw DomainError("student_sf: degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double at = std::fabs(t);
  double x;
  double y;
  if (at < 1e150) {
    const double t2 = at * at;
    x = nu / (nu + t2);
    y = t2 / (nu + t2);
  } else {
    x = nu / at / at;
    y = 1.0 - x;
  }
  const BetaPair pair = ibeta_pair(0.5 * nu, 0.5, x, y);
  const double upper_tail = 0.5 * pair.lower;
  return t >= 0.0 ? upper_tail : 1.0 - upper_tail;
}

double student_cdf(double nu, double t) { return student_sf(nu, -t); }

double student_quantile_upper(double nu, double tail) {
  if (!(nu > 0.0)) throw DomainError("student_quantile: degrees of freedom must be positive");
  if (!(tail > 0.0 && tail < 1.0)) throw DomainError("student_quantile: level must lie in (0, 1)");
  if (tail > 0.5) return -student_quantile_upper(nu, 1.0 - tail);
  if (tail == 0.5) return 0.0;
  // 0.5 * I_x(nu/2, 1/2) = tail with x = nu / (nu + t^2).
  const double target = 2.0 * tail;
  double x;
  double y;
  if (target <= 0.5) {
    x = ibeta_inv_lower(0.5 * nu, 0.5, target);
    y = 1.0 - x;
  } else {
    y = ibeta_inv_lower(0.5, 0.5 * nu, 1.0 - target);
    x = 1.0 - y;
  }
  return std::sqrt(nu * y / x);
}

double student_quantile(double nu, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("student_quantile: level must lie in (0, 1)");
  if (alpha < 0.5) return -student_quantile_upper(nu, alpha);
  return student_quantile_upper(nu, 1.0 - alpha);
}

}  // namespace ecrisk::special
