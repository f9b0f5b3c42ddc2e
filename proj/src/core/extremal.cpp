#include "core/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "core/error.hpp"
#include "core/special.hpp"

namespace ecrisk {

std::string to_string(HillMode mode) {
  return mode == HillMode::Component ? "component" : "mahalanobis";
}

std::string to_string(KernelType kernel) {
  switch (kernel) {
    case KernelType::Gaussian:
      return "gaussian";
    case KernelType::Epanechnikov:
      return "epanechnikov";
    case KernelType::Uniform:
      return "uniform";
  }
  return "gaussian";
}

std::string to_string(JointRegime regime) {
  switch (regime) {
    case JointRegime::KnDominates:
      return "kn_dominates";
    case JointRegime::NhnDominates:
      return "nhn_dominates";
    case JointRegime::Ambiguous:
      return "ambiguous";
  }
  return "ambiguous";
}

HillMode parse_hill_mode(const std::string& text) {
  if (text == "component") return HillMode::Component;
  if (text == "mahalanobis" || text == "mahalanobis_norm") return HillMode::MahalanobisNorm;
  throw DomainError("unknown Hill mode '" + text + "' (expected component or mahalanobis)");
}

KernelType parse_kernel(const std::string& text) {
  if (text == "gaussian") return KernelType::Gaussian;
  if (text == "epanechnikov") return KernelType::Epanechnikov;
  if (text == "uniform") return KernelType::Uniform;
  throw DomainError("unknown kernel '" + text + "' (expected gaussian, epanechnikov or uniform)");
}

double ExtremalEstimate::se_eta() const {
  return k > 0 ? std::sqrt(var_eta / static_cast<double>(k)) : 0.0;
}

double ExtremalEstimate::se_ell() const {
  const double se1 = k > 0 ? std::sqrt(var_ell_regime1 / static_cast<double>(k)) : 0.0;
  const double nh = static_cast<double>(n) * h;
  const double se2 = nh > 0 ? std::sqrt(var_ell_regime2 / nh) : 0.0;
  switch (regime) {
    case JointRegime::KnDominates:
      return se1;
    case JointRegime::NhnDominates:
      return se2;
    case JointRegime::Ambiguous:
      return std::max(se1, se2);
  }
  return se1;
}

double hill(std::span<const double> w, std::size_t k) {
  const std::size_t n = w.size();
  if (n < 2 || k < 1 || k > n - 1) {
    std::ostringstream msg;
    msg << "hill: k must satisfy 1 <= k <= n-1 (k=" << k << ", n=" << n << ")";
    throw DomainError(msg.str());
  }
  std::vector<double> top(w.begin(), w.end());
  std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k + 1), top.end(),
                    std::greater<>());
  const double threshold = top[k];
  if (!(threshold > 0.0)) {
    std::ostringstream msg;
    msg << "hill: the (k+1)-th largest value " << threshold
        << " is not positive; use a smaller k or the mahalanobis mode";
    throw DomainError(msg.str());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(top[i] / threshold);
  return sum / static_cast<double>(k);
}

double descending_order_statistic(std::span<const double> w, std::size_t rank) {
  if (rank < 1 || rank > w.size()) {
    std::ostringstream msg;
    msg << "order statistic rank " << rank << " outside [1, " << w.size() << "]";
    throw DomainError(msg.str());
  }
  std::vector<double> copy(w.begin(), w.end());
  auto nth = copy.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(copy.begin(), nth, copy.end(), std::greater<>());
  return *nth;
}

EtaEstimate estimate_eta(std::span<const double> w, std::size_t k, std::size_t N) {
  const double gamma = hill(w, k);
  const double eta = static_cast<double>(N) * gamma + 1.0;
  const double se = std::sqrt(static_cast<double>(N * N) * gamma * gamma / static_cast<double>(k));
  return {gamma, eta, se};
}

double kernel_value(KernelType kernel, double u) {
  switch (kernel) {
    case KernelType::Gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * special::kPi);
    case KernelType::Epanechnikov:
      return std::fabs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelType::Uniform:
      return std::fabs(u) <= 1.0 ? 0.5 : 0.0;
  }
  return 0.0;
}

double kernel_square_integral(KernelType kernel) {
  switch (kernel) {
    case KernelType::Gaussian:
      return 1.0 / (2.0 * std::sqrt(special::kPi));
    case KernelType::Epanechnikov:
      return 0.6;
    case KernelType::Uniform:
      return 0.5;
  }
  return 0.0;
}

namespace {

void check_bandwidth(const KernelConfig& config) {
  if (!(config.bandwidth > 0.0) || !std::isfinite(config.bandwidth))
    throw DomainError("kernel bandwidth must be positive");
}

// Beyond this many bandwidths every kernel weight is exactly zero in double.
double kernel_support(KernelType kernel) { return kernel == KernelType::Gaussian ? 40.0 : 1.0; }

double generator_prefactor(double m_x, std::size_t N) {
  const double half = 0.5 * static_cast<double>(N);
  return std::pow(m_x, 1.0 - half) * std::exp(special::log_gamma(half) - half * std::log(special::kPi));
}

}  // namespace

double kernel_density(std::span<const double> m_values, double t, const KernelConfig& config) {
  check_bandwidth(config);
  if (m_values.empty()) throw DomainError("kernel density: empty sample");
  const double h = config.bandwidth;
  double sum = 0.0;
  for (double m : m_values) sum += kernel_value(config.kernel, (t - m) / h);
  return sum / (static_cast<double>(m_values.size()) * h);
}

KernelDensity::KernelDensity(std::vector<double> m_values, KernelConfig config)
    : sorted_(std::move(m_values)), config_(config), support_(kernel_support(config.kernel)) {
  check_bandwidth(config_);
  if (sorted_.empty()) throw DomainError("kernel density: empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double KernelDensity::operator()(double t) const {
  const double h = config_.bandwidth;
  auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), t - support_ * h);
  auto hi = std::upper_bound(lo, sorted_.end(), t + support_ * h);
  double sum = 0.0;
  for (auto it = lo; it != hi; ++it) sum += kernel_value(config_.kernel, (t - *it) / h);
  return sum / (static_cast<double>(sorted_.size()) * h);
}

double kernel_generator_estimate(std::span<const double> m_values, double m_x,
                                 const KernelConfig& config, std::size_t N) {
  if (N < 1) throw DomainError("kernel generator estimate: covariate dimension must be >= 1");
  if (!(m_x >= 0.0) || !std::isfinite(m_x))
    throw DomainError("kernel generator estimate: M(x) must be a finite nonnegative number");
  if (m_x < kMinMahalanobis && N >= 3)
    throw DomainError(
        "kernel generator estimate: M(x) ~ 0 makes the prefactor M^(1-N/2) singular for N >= 3; "
        "choose a covariate point away from the center");
  const double f_hat = kernel_density(m_values, m_x, config);
  return generator_prefactor(m_x, N) * f_hat;
}

double estimate_ell(double gamma, double g, std::size_t N) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("estimate_ell: gamma must be positive");
  if (!(g > 0.0) || !std::isfinite(g))
    throw DomainError("estimate_ell: generator estimate must be positive (empty kernel window?)");
  const double inv = 1.0 / gamma;
  const double n = static_cast<double>(N);
  return special::gamma_ratio(0.5 * (n + inv + 1.0), 0.5 * (inv + 1.0)) * inv *
         std::pow(special::kPi, -0.5 * n) / ((n + inv) * g);
}

double variance_v1(double gamma, double g, std::size_t N) {
  if (!(gamma > 0.0) || !(g > 0.0)) throw DomainError("variance_v1: gamma and g must be positive");
  const double n = static_cast<double>(N);
  const double inv = 1.0 / gamma;
  const double upper = 0.5 * (n + inv + 1.0);
  const double lower = 0.5 * (inv + 1.0);
  const double ratio = special::gamma_ratio(upper, lower);
  const double denom = n * gamma + 1.0;
  const double bracket = (special::digamma(lower) - special::digamma(upper)) /
                             (2.0 * gamma * gamma * denom) -
                         n / (denom * denom);
  return std::pow(special::kPi, -n) * gamma * gamma / (g * g) * ratio * ratio * bracket * bracket;
}

double variance_v2(double gamma, double g, std::size_t N, double m_x, KernelType kernel) {
  if (!(gamma > 0.0) || !(g > 0.0)) throw DomainError("variance_v2: gamma and g must be positive");
  if (N < 1) throw DomainError("variance_v2: covariate dimension must be >= 1");
  if (!(m_x > 0.0)) throw DomainError("variance_v2: M(x) must be positive");
  const double n = static_cast<double>(N);
  const double inv = 1.0 / gamma;
  const double ratio = special::gamma_ratio(0.5 * (n + inv + 1.0), 0.5 * (inv + 1.0));
  const double derivative = ratio * inv * std::pow(special::kPi, -0.5 * n) / ((n + inv) * g * g);
  return generator_prefactor(m_x, N) * g * kernel_square_integral(kernel) * derivative * derivative;
}

JointRegime joint_regime(std::size_t n, std::size_t k, double h) {
  const double ratio = static_cast<double>(n) * h / static_cast<double>(k);
  if (ratio > 2.0) return JointRegime::KnDominates;
  if (ratio < 0.5) return JointRegime::NhnDominates;
  return JointRegime::Ambiguous;
}

ExtremalEstimate estimate_extremal(std::span<const double> w, std::span<const double> m_values,
                                   double m_x, std::size_t N, std::size_t k,
                                   const KernelConfig& kernel) {
  ExtremalEstimate est;
  const EtaEstimate eta = estimate_eta(w, k, N);
  est.gamma_hat = eta.gamma;
  est.eta_hat = eta.eta;
  est.g_hat = kernel_generator_estimate(m_values, m_x, kernel, N);
  est.ell_hat = estimate_ell(est.gamma_hat, est.g_hat, N);
  const double n_cov = static_cast<double>(N);
  est.var_eta = n_cov * n_cov * est.gamma_hat * est.gamma_hat;
  est.var_ell_regime1 = variance_v1(est.gamma_hat, est.g_hat, N);
  est.var_ell_regime2 =
      m_x > 0.0 ? variance_v2(est.gamma_hat, est.g_hat, N, m_x, kernel.kernel) : 0.0;
  est.k = k;
  est.n = w.size();
  est.N = N;
  est.h = kernel.bandwidth;
  est.m_x = m_x;
  est.regime = joint_regime(est.n, k, kernel.bandwidth);
  return est;
}

}  // namespace ecrisk
