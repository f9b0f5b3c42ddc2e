#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "core/elliptical.hpp"
#include "core/experiments.hpp"
#include "core/quantile.hpp"

namespace ecrisk {

/// Headerless CSV, one row per observation, 17 significant digits.
std::string sample_to_csv(const SampleMatrix& data);
SampleMatrix sample_from_csv(const std::string& text, const std::string& source = "<memory>");
SampleMatrix read_sample_csv(const std::string& path);
void write_sample_csv(const std::string& path, const SampleMatrix& data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Splits RFC-4180 text into records of fields. Quoted fields may hold
/// commas, doubled quotes and line breaks.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& source);

struct ReturnsTable {
  std::vector<std::string> dates;
  /// Covariate names followed by the target name.
  std::vector<std::string> names;
  /// Row-major, columns ordered as names.
  SampleMatrix values{0, 0, {}};

  std::size_t rows() const { return values.rows(); }
};

/// Reads a returns table with a header row. The first column holds date
/// labels unless it is one of the requested columns.
ReturnsTable parse_returns(const std::string& text, const std::vector<std::string>& covariates,
                           const std::string& target, const std::string& source = "<memory>");
ReturnsTable load_returns(const std::string& path, const std::vector<std::string>& covariates,
                          const std::string& target);

struct MomentEstimate {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

/// Sample mean and 1/(n-1) covariance, symmetrized.
MomentEstimate estimate_moments(const SampleMatrix& values,
                                const std::vector<std::string>& names = {});

struct RealDataOptions {
  double b = 0.6;
  double c = 0.2;
  /// Empty selects a = (1 - b) * eta_hat.
  std::optional<double> a;
  double rho = -1.0;
  KernelType kernel = KernelType::Gaussian;
  std::vector<MeasureKind> measures{MeasureKind{}};
  /// Covariate point; empty uses the covariates of the last row.
  std::optional<std::vector<double>> x;
};

struct RealDataResult {
  std::size_t n_total = 0;
  std::size_t n_learning = 0;
  MomentEstimate moments;
  std::vector<double> x;
  bool a_auto = false;
  SequenceSchedule schedule;
  QuantileRegime regime = QuantileRegime::High;
  ExtremalStep step;
  ConditionReport conditions;
  std::vector<RiskEstimate> estimates;
};

/// Moments on all rows but the last, whitening, Hill / eta / ell and the
/// quantile at alpha_n = 1 - n^{-a}.
RealDataResult real_data_pipeline(const ReturnsTable& table, const RealDataOptions& options);

}  // namespace ecrisk
