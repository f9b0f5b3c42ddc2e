#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ecrisk {

/// Statistic fed to the Hill estimator: one whitened covariate or the
/// Mahalanobis norm sqrt(M(X_i)).
enum class HillMode { Component, MahalanobisNorm };

struct HillConfig {
  std::size_t k = 0;
  std::size_t component_index = 0;
  HillMode mode = HillMode::Component;
};

enum class KernelType { Gaussian, Epanechnikov, Uniform };

struct KernelConfig {
  double bandwidth = 0.0;
  KernelType kernel = KernelType::Gaussian;
};

/// Which of the two joint limit laws of (ell_hat, eta_hat) applies, decided by
/// comparing n*h_n with k_n.
enum class JointRegime { KnDominates, NhnDominates, Ambiguous };

std::string to_string(HillMode mode);
std::string to_string(KernelType kernel);
std::string to_string(JointRegime regime);
HillMode parse_hill_mode(const std::string& text);
KernelType parse_kernel(const std::string& text);

struct ExtremalEstimate {
  double gamma_hat = 0.0;
  double eta_hat = 1.0;
  double g_hat = 0.0;
  double ell_hat = 0.0;
  double var_eta = 0.0;          // N^2 gamma^2, per sqrt(k) scaling
  double var_ell_regime1 = 0.0;  // V1, sqrt(k) scaling
  double var_ell_regime2 = 0.0;  // V2, sqrt(n h) scaling
  JointRegime regime = JointRegime::KnDominates;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t N = 0;
  double h = 0.0;
  double m_x = 0.0;

  double se_eta() const;
  /// Standard error of ell_hat for the recorded regime (the larger of the two
  /// when the regime is ambiguous).
  double se_ell() const;
};

/// Hill estimator (1/k) sum_{i<=k} ln(W_[i] / W_[k+1]) over descending order
/// statistics. Only the top k+1 values must be positive.
double hill(std::span<const double> w, std::size_t k);

/// i-th largest value (1-based) of w.
double descending_order_statistic(std::span<const double> w, std::size_t rank);

struct EtaEstimate {
  double gamma;
  double eta;
  double std_error;
};

/// eta_hat = N * hill(w) + 1 with standard error sqrt(N^2 gamma^2 / k).
EtaEstimate estimate_eta(std::span<const double> w, std::size_t k, std::size_t N);

double kernel_value(KernelType kernel, double u);
/// Integral of K(u)^2 over the real line.
double kernel_square_integral(KernelType kernel);

/// Raw kernel density estimate of the Mahalanobis distance law at t.
double kernel_density(std::span<const double> m_values, double t, const KernelConfig& config);

/// Sorted copy of the sample for repeated density evaluations; results equal
/// kernel_density bit for bit only up to summation order.
class KernelDensity {
 public:
  KernelDensity(std::vector<double> m_values, KernelConfig config);
  double operator()(double t) const;
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

 private:
  std::vector<double> sorted_;
  KernelConfig config_;
  double support_;
};

/// Below this M(x) the generator prefactor is treated as singular (N >= 3).
inline constexpr double kMinMahalanobis = 1e-10;

/// Estimate of c_N g_N(m_x): M^{1-N/2} Gamma(N/2) pi^{-N/2} f_hat(m_x).
double kernel_generator_estimate(std::span<const double> m_values, double m_x,
                                 const KernelConfig& config, std::size_t N);

/// ell(x) from a tail index and a generator value c_N g_N(M(x)).
double estimate_ell(double gamma, double g, std::size_t N);

/// Asymptotic variance of ell_hat when k_n = o(n h_n).
double variance_v1(double gamma, double g, std::size_t N);
/// Asymptotic variance of ell_hat when n h_n = o(k_n).
double variance_v2(double gamma, double g, std::size_t N, double m_x, KernelType kernel);

JointRegime joint_regime(std::size_t n, std::size_t k, double h);

/// Full extremal step: Hill on w, kernel generator estimate on the Mahalanobis
/// distances, ell_hat and both variances.
ExtremalEstimate estimate_extremal(std::span<const double> w, std::span<const double> m_values,
                                   double m_x, std::size_t N, std::size_t k,
                                   const KernelConfig& kernel);

}  // namespace ecrisk
