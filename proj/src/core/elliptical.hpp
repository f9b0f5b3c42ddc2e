#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ecrisk {

struct GaussianFamily {};

struct StudentFamily {
  double nu;
};

/// Uniform-Gaussian mixture: scale mixture of Gaussians with rates theta_k.
struct UgmFamily {
  std::vector<double> weights;
  std::vector<double> rates;
};

struct SlashFamily {
  double a;
};

using Family = std::variant<GaussianFamily, StudentFamily, UgmFamily, SlashFamily>;

std::string family_name(const Family& family);

/// Validates family parameters; throws DomainError.
void validate_family(const Family& family);

/// Tail index of the radial law, when the family is heavy tailed.
std::optional<double> family_tail_index(const Family& family);

/// A consistent elliptical law: location, scale matrix and generator family.
/// The factorization sigma = L L^T is computed once at construction.
class EllipticalModel {
 public:
  EllipticalModel(Eigen::VectorXd mu, Eigen::MatrixXd sigma, Family family);

  std::size_t dimension() const { return static_cast<std::size_t>(mu_.size()); }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Family& family() const { return family_; }
  /// Lower Cholesky factor L with L L^T = sigma.
  const Eigen::MatrixXd& cholesky_factor() const { return chol_; }

  /// Marginal law of the leading `dim` coordinates (same family by consistency).
  EllipticalModel leading_block(std::size_t dim) const;

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  Family family_;
  Eigen::MatrixXd chol_;
};

/// Location, scale and Mahalanobis distance of Y | X = x.
struct ConditionalMoments {
  double mu_cond;
  double sigma_cond;
  double m_x;
};

/// (x - mu)^T sigma^{-1} (x - mu) for a model over the covariates only.
double mahalanobis(const EllipticalModel& covariates, std::span<const double> x);

/// Conditional moments of the last coordinate given the leading d-1 at x.
ConditionalMoments conditional_moments(const EllipticalModel& joint, std::span<const double> x);

/// Row-major n x cols matrix of observations.
class SampleMatrix {
 public:
  SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<double> column(std::size_t j) const;
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Draws n i.i.d. rows. Gaussian and Student families only; Student rows use
/// mu + L G / sqrt(chi2_nu / nu). Deterministic for a fixed seed.
SampleMatrix sample(const EllipticalModel& model, std::size_t n, std::uint64_t seed);

/// Component `index` of L^{-1}(X_i - mu) for every row, using the leading
/// covariates.dimension() columns of the sample.
std::vector<double> whitened_component(const SampleMatrix& data, const EllipticalModel& covariates,
                                       std::size_t index);

/// M(X_i) for every row, using the leading covariates.dimension() columns.
std::vector<double> mahalanobis_values(const SampleMatrix& data, const EllipticalModel& covariates);

}  // namespace ecrisk
