#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/elliptical.hpp"
#include "core/extremal.hpp"
#include "core/quantile.hpp"

namespace ecrisk {

/// Hill input, conditional moments and extremal estimates for one sample.
struct ExtremalStep {
  std::vector<double> w;
  ConditionalMoments cond;
  ExtremalEstimate est;
};

/// Whitens the covariates with the leading block of `joint`, runs Hill on the
/// first whitened component and the kernel generator estimate at x.
ExtremalStep extremal_step(const SampleMatrix& data, const EllipticalModel& joint,
                           std::span<const double> x, const SequenceSchedule& schedule,
                           KernelType kernel);

/// Quantile at the schedule level in the given regime, then each measure.
std::vector<RiskEstimate> risk_step(const ExtremalStep& step, const SequenceSchedule& schedule,
                                    QuantileRegime regime, const std::vector<MeasureKind>& measures);

struct ExperimentPlan {
  EllipticalModel model;
  std::vector<double> x;
  SequenceSchedule schedule;
  std::vector<std::size_t> sizes;
  std::size_t replicates = 100;
  std::vector<MeasureKind> measures{MeasureKind{}};
  std::uint64_t base_seed = 1;
  KernelType kernel = KernelType::Gaussian;
  /// Defaults to the regime implied by schedule.a.
  std::optional<QuantileRegime> regime;
  /// 0 selects ECRISK_THREADS or the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
  QuantileRegime resolved_regime() const;
};

struct ReplicateRecord {
  std::size_t n = 0;
  MeasureKind measure;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double estimate = 0.0;
  double oracle = 0.0;
  double ratio = 0.0;
  double standardized_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool hit = false;
};

/// min, first quartile, median, third quartile, max.
using FiveNumber = std::array<double, 5>;

struct MeasureSummary {
  MeasureKind measure;
  double oracle = 0.0;
  std::size_t successes = 0;
  std::vector<std::size_t> failed_replicates;
  /// Sample variance of the standardized errors; absent below two successes.
  std::optional<double> empirical_variance;
  /// Replicates whose 95% CI covers the oracle; failures count as misses.
  std::size_t coverage = 0;
  std::optional<FiveNumber> relative_error;
  std::optional<double> mean_estimate;
  std::optional<double> median_abs_relative_error;
  std::optional<double> kurtosis;
  /// Plug-in limit variance at the true tail index.
  double asymptotic_variance = 0.0;
};

struct SizeSummary {
  std::size_t n = 0;
  std::size_t k = 0;
  double h = 0.0;
  double tail = 0.0;
  double eta_true = 0.0;
  double ell_true = 0.0;
  std::size_t extremal_successes = 0;
  std::optional<double> mean_eta;
  std::optional<double> median_abs_eta_error;
  std::optional<double> mean_ell;
  std::optional<double> median_abs_ell_error;
  std::vector<MeasureSummary> measures;
};

struct ExperimentReport {
  QuantileRegime regime = QuantileRegime::High;
  double gamma_true = 0.0;
  std::size_t N = 0;
  double m_x = 0.0;
  std::optional<double> theta;
  std::vector<SizeSummary> sizes;
  std::vector<ReplicateRecord> records;
};

/// Runs every (size, replicate) pair; replicate i of every size uses seed base_seed + i.
ExperimentReport run(const ExperimentPlan& plan);

/// (intermediate variance, high variance) at gamma, N and the schedule's theta.
std::pair<double, double> asymptotic_variance_table(const SequenceSchedule& schedule, double gamma,
                                                    std::size_t N);

/// Standardized-error rate: sqrt(k)/|ln tail| (intermediate) or sqrt(k)/ln(k/(n tail)) (high).
double regime_rate(QuantileRegime regime, std::size_t n, std::size_t k, double tail);

FiveNumber five_number_summary(std::vector<double> values);

/// Thread count from an explicit request, then ECRISK_THREADS, then hardware.
unsigned resolve_threads(unsigned requested);

}  // namespace ecrisk
