#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/elliptical.hpp"
#include "core/extremal.hpp"

namespace ecrisk {

/// Two-sided 95% normal quantile.
inline constexpr double kNormal975 = 1.959963984540054;

/// Polynomial sequences alpha_n = 1 - n^{-a}, k_n = n^b, h_n = n^{-c}, plus
/// the tail metadata (rho, gamma_ref, N) used only by condition checks.
struct SequenceSchedule {
  double a = 1.25;
  double b = 0.6;
  double c = 0.2;
  double rho = -1.0;
  double gamma_ref = 0.5;
  std::size_t N = 1;

  void validate() const;
  /// floor(n^b), clamped to [1, n-1].
  std::size_t k(std::size_t n) const;
  double bandwidth(std::size_t n) const;
  /// 1 - alpha_n = n^{-a}.
  double tail(std::size_t n) const;
  double level(std::size_t n) const { return 1.0 - tail(n); }
  /// a / (a + b - 1); empty when a + b = 1.
  std::optional<double> theta() const;
};

struct ConditionCheck {
  std::string name;
  bool pass = false;
  std::string inequality;
};

struct ConditionReport {
  std::vector<ConditionCheck> checks;
  std::optional<double> theta;
  bool theta_degenerate = false;

  /// Throws DomainError for an unknown condition name.
  bool passes(const std::string& name) const;
  const ConditionCheck& get(const std::string& name) const;
};

/// Reduces the sequence conditions (C), (C_int), (C_high) and their HG / Lp
/// refinements to inequalities on (a, b, c, gamma, rho, N).
ConditionReport check_conditions(const SequenceSchedule& schedule);

enum class MeasureType { Quantile, LpQuantile, HaezendonckGoovaerts };

struct MeasureKind {
  MeasureType type = MeasureType::Quantile;
  double p = 1.0;

  /// "quantile", "lp:<p>" or "hg:<p>".
  std::string tag() const;
  static MeasureKind parse(const std::string& tag);
  friend bool operator==(const MeasureKind&, const MeasureKind&) = default;
};

enum class QuantileRegime { Intermediate, High };

std::string to_string(QuantileRegime regime);

/// value = location + scale * radial; the CI is the 95% normal interval for
/// value / truth - 1 with standard error se_ratio.
struct RiskEstimate {
  MeasureKind kind;
  double level = 0.0;
  double tail = 0.0;
  double value = 0.0;
  double location = 0.0;
  double scale = 1.0;
  double radial = 0.0;
  double factor = 1.0;
  double se_ratio = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  QuantileRegime regime = QuantileRegime::High;
  std::size_t order_rank = 0;
  std::vector<std::string> warnings;
};

/// v_n = (2 + ell (1/tail - 2))^{-1}; exact at ell = 1.
double reduced_tail(double ell, double tail);

/// Theorem-1 variance N^2 gamma^4 / (gamma N + 1)^4.
double intermediate_asymptotic_variance(double gamma, std::size_t N);
/// Theorem-2 variance (gamma/(gamma N + 1) - theta N gamma^2/(gamma N + 1)^2)^2.
double high_asymptotic_variance(double gamma, std::size_t N, double theta);

/// Sets ci_low / ci_high from value and se_ratio.
void set_ratio_interval(RiskEstimate& estimate);

/// Order-statistic estimator mu + sigma * W_[floor(n v_n) + 1]^{1/eta}.
RiskEstimate intermediate_quantile(std::span<const double> w, const ConditionalMoments& cond,
                                   const ExtremalEstimate& est, const SequenceSchedule& schedule);

/// Extrapolated estimator mu + sigma * [W_[k+1] (k / (n v_n))^gamma]^{1/eta}.
RiskEstimate high_quantile(std::span<const double> w, const ConditionalMoments& cond,
                           const ExtremalEstimate& est, const SequenceSchedule& schedule);

/// Picks the regime from the schedule: a < 1 intermediate, otherwise high.
QuantileRegime schedule_regime(const SequenceSchedule& schedule);

}  // namespace ecrisk
