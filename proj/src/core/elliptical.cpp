#include "core/elliptical.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "core/error.hpp"

namespace ecrisk {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string family_name(const Family& family) {
  return std::visit(Overloaded{[](const GaussianFamily&) { return std::string("gaussian"); },
                               [](const StudentFamily&) { return std::string("student"); },
                               [](const UgmFamily&) { return std::string("ugm"); },
                               [](const SlashFamily&) { return std::string("slash"); }},
                    family);
}

void validate_family(const Family& family) {
  std::visit(Overloaded{
                 [](const GaussianFamily&) {},
                 [](const StudentFamily& s) {
                   if (!(s.nu > 0.0) || !std::isfinite(s.nu))
                     throw DomainError("student family requires nu > 0");
                 },
                 [](const UgmFamily& u) {
                   if (u.weights.empty() || u.weights.size() != u.rates.size())
                     throw DomainError("ugm family requires matching non-empty weights and rates");
                   double total = 0.0;
                   for (double w : u.weights) {
                     if (!(w >= 0.0)) throw DomainError("ugm weights must be nonnegative");
                     total += w;
                   }
                   if (std::fabs(total - 1.0) > 1e-12)
                     throw DomainError("ugm weights must sum to 1 within 1e-12");
                   for (double r : u.rates)
                     if (!(r > 0.0)) throw DomainError("ugm rates must be positive");
                 },
                 [](const SlashFamily& s) {
                   if (!(s.a > 0.0) || !std::isfinite(s.a))
                     throw DomainError("slash family requires a > 0");
                 }},
             family);
}

std::optional<double> family_tail_index(const Family& family) {
  if (const auto* s = std::get_if<StudentFamily>(&family)) return 1.0 / s->nu;
  if (const auto* s = std::get_if<SlashFamily>(&family)) return 1.0 / s->a;
  return std::nullopt;
}

EllipticalModel::EllipticalModel(Eigen::VectorXd mu, Eigen::MatrixXd sigma, Family family)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), family_(std::move(family)) {
  validate_family(family_);
  const auto d = mu_.size();
  if (d < 1) throw DomainError("model dimension must be at least 1");
  if (sigma_.rows() != d || sigma_.cols() != d) {
    std::ostringstream msg;
    msg << "sigma must be " << d << "x" << d << ", got " << sigma_.rows() << "x" << sigma_.cols();
    throw DomainError(msg.str());
  }
  if (!mu_.allFinite() || !sigma_.allFinite()) throw DomainError("model parameters must be finite");
  const double scale = std::max(sigma_.cwiseAbs().maxCoeff(), 1e-300);
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("sigma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
  if (llt.info() != Eigen::Success) throw DomainError("sigma is not positive definite");
  chol_ = llt.matrixL();
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(chol_(i, i) > 0.0)) throw DomainError("sigma is not positive definite");
}

EllipticalModel EllipticalModel::leading_block(std::size_t dim) const {
  if (dim < 1 || dim > dimension()) throw DomainError("leading_block: dimension out of range");
  const auto k = static_cast<Eigen::Index>(dim);
  return EllipticalModel(mu_.head(k), sigma_.topLeftCorner(k, k), family_);
}

double mahalanobis(const EllipticalModel& covariates, std::span<const double> x) {
  if (x.size() != covariates.dimension()) {
    std::ostringstream msg;
    msg << "mahalanobis: covariate point has length " << x.size() << ", model expects "
        << covariates.dimension();
    throw DomainError(msg.str());
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd z = covariates.cholesky_factor().triangularView<Eigen::Lower>().solve(
      xv - covariates.mu());
  return z.squaredNorm();
}

ConditionalMoments conditional_moments(const EllipticalModel& joint, std::span<const double> x) {
  const std::size_t d = joint.dimension();
  if (d < 2) throw DomainError("conditional_moments: model needs at least one covariate");
  const std::size_t n_cov = d - 1;
  if (x.size() != n_cov) {
    std::ostringstream msg;
    msg << "conditional_moments: covariate point has length " << x.size() << ", model expects "
        << n_cov;
    throw DomainError(msg.str());
  }
  const auto N = static_cast<Eigen::Index>(n_cov);
  const Eigen::MatrixXd sigma_x = joint.sigma().topLeftCorner(N, N);
  const Eigen::VectorXd sigma_xy = joint.sigma().col(N).head(N);
  const double sigma_y = joint.sigma()(N, N);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_x);
  if (llt.info() != Eigen::Success) throw DomainError("covariate block of sigma is not positive definite");

  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), N);
  const Eigen::VectorXd centered = xv - joint.mu().head(N);
  const Eigen::VectorXd solved_x = llt.solve(centered);
  const Eigen::VectorXd solved_xy = llt.solve(sigma_xy);

  ConditionalMoments out{};
  out.mu_cond = joint.mu()(N) + sigma_xy.dot(solved_x);
  const double var_cond = sigma_y - sigma_xy.dot(solved_xy);
  if (!(var_cond > 1e-12 * sigma_y))
    throw DomainError("conditional_moments: degenerate conditional law (sigma_cond^2 <= 1e-12 * Sigma_Y)");
  out.sigma_cond = std::sqrt(var_cond);
  out.m_x = std::max(0.0, centered.dot(solved_x));
  return out;
}

SampleMatrix::SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw DomainError("sample matrix: data size does not match shape");
}

std::vector<double> SampleMatrix::column(std::size_t j) const {
  if (j >= cols_) throw DomainError("sample matrix: column index out of range");
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = data_[i * cols_ + j];
  return out;
}

SampleMatrix sample(const EllipticalModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample: n must be at least 1");
  const std::size_t d = model.dimension();
  const bool is_gaussian = std::holds_alternative<GaussianFamily>(model.family());
  const auto* student = std::get_if<StudentFamily>(&model.family());
  if (!is_gaussian && student == nullptr)
    throw DomainError("sample: only gaussian and student families can be sampled, got " +
                      family_name(model.family()));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> chi2(student ? 0.5 * student->nu : 1.0, 2.0);

  const Eigen::MatrixXd& L = model.cholesky_factor();
  std::vector<double> data(n * d);
  Eigen::VectorXd g(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) g(static_cast<Eigen::Index>(j)) = normal(rng);
    double scale = 1.0;
    if (student) scale = 1.0 / std::sqrt(chi2(rng) / student->nu);
    const Eigen::VectorXd z = L.triangularView<Eigen::Lower>() * g;
    for (std::size_t j = 0; j < d; ++j)
      data[i * d + j] = model.mu()(static_cast<Eigen::Index>(j)) + scale * z(static_cast<Eigen::Index>(j));
  }
  return SampleMatrix(n, d, std::move(data));
}

namespace {

void check_covariate_columns(const SampleMatrix& data, const EllipticalModel& covariates) {
  if (data.cols() < covariates.dimension()) {
    std::ostringstream msg;
    msg << "sample has " << data.cols() << " columns, covariate model needs "
        << covariates.dimension();
    throw DomainError(msg.str());
  }
}

}  // namespace

std::vector<double> whitened_component(const SampleMatrix& data, const EllipticalModel& covariates,
                                       std::size_t index) {
  check_covariate_columns(data, covariates);
  const std::size_t N = covariates.dimension();
  if (index >= N) throw DomainError("whitened_component: component index out of range");
  const Eigen::MatrixXd& L = covariates.cholesky_factor();
  const Eigen::VectorXd& mu = covariates.mu();
  std::vector<double> out(data.rows());
  std::vector<double> z(index + 1);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    // Forward substitution stops at the requested component.
    for (std::size_t r = 0; r <= index; ++r) {
      double acc = data(i, r) - mu(static_cast<Eigen::Index>(r));
      for (std::size_t c = 0; c < r; ++c)
        acc -= L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * z[c];
      z[r] = acc / L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
    }
    out[i] = z[index];
  }
  return out;
}

std::vector<double> mahalanobis_values(const SampleMatrix& data, const EllipticalModel& covariates) {
  check_covariate_columns(data, covariates);
  const std::size_t N = covariates.dimension();
  const Eigen::MatrixXd& L = covariates.cholesky_factor();
  const Eigen::VectorXd& mu = covariates.mu();
  std::vector<double> out(data.rows());
  std::vector<double> z(N);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double norm2 = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
      double acc = data(i, r) - mu(static_cast<Eigen::Index>(r));
      for (std::size_t c = 0; c < r; ++c)
        acc -= L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * z[c];
      z[r] = acc / L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
      norm2 += z[r] * z[r];
    }
    out[i] = norm2;
  }
  return out;
}

}  // namespace ecrisk
