#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/elliptical.hpp"
#include "core/error.hpp"
#include "core/extremal.hpp"

using namespace ecrisk;

namespace {

EllipticalModel identity_student(double nu, int d) {
  return EllipticalModel(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d), StudentFamily{nu});
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("model validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(EllipticalModel(Eigen::VectorXd::Zero(2), bad, GaussianFamily{}), DomainError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.1, 0.2, 1;
  CHECK_THROWS_AS(EllipticalModel(Eigen::VectorXd::Zero(2), asym, GaussianFamily{}), DomainError);
  CHECK_THROWS_AS(identity_student(-1.0, 2), DomainError);
  CHECK_THROWS_AS(EllipticalModel(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), SlashFamily{0.0}),
                  DomainError);
  CHECK_THROWS_AS(EllipticalModel(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
                                  UgmFamily{{0.5, 0.4}, {1.0, 2.0}}),
                  DomainError);
  CHECK_NOTHROW(EllipticalModel(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
                                UgmFamily{{0.5, 0.5}, {1.0, 2.0}}));
}

TEST_CASE("mahalanobis distance") {
  const auto model = identity_student(2, 3);
  const std::vector<double> center{0, 0, 0};
  const std::vector<double> unit{1, 0, 0};
  CHECK(mahalanobis(model, center) == 0.0);
  CHECK(mahalanobis(model, unit) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(mahalanobis(model, std::vector<double>{1, 0}), DomainError);

  Eigen::MatrixXd sigma(3, 3);
  sigma << 2.0, 0.3, -0.2, 0.3, 1.5, 0.4, -0.2, 0.4, 1.0;
  Eigen::VectorXd mu(3);
  mu << 0.5, -1.0, 2.0;
  const EllipticalModel general(mu, sigma, GaussianFamily{});
  const std::vector<double> x{1.3, 0.2, -0.7};
  std::vector<double> mirrored(3);
  for (int i = 0; i < 3; ++i) mirrored[i] = 2 * mu(i) - x[i];
  const Eigen::Vector3d diff = Eigen::Vector3d(x[0], x[1], x[2]) - mu;
  CHECK(mahalanobis(general, x) == doctest::Approx(diff.dot(sigma.inverse() * diff)).epsilon(1e-12));
  CHECK(mahalanobis(general, x) == doctest::Approx(mahalanobis(general, mirrored)).epsilon(1e-14));
  CHECK(mahalanobis(general, std::vector<double>{0.5, -1.0, 2.0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("conditional moments") {
  const auto model = identity_student(2, 4);
  const auto cond = conditional_moments(model, std::vector<double>{0.3, -2.0, 1.0});
  CHECK(cond.mu_cond == 0.0);
  CHECK(cond.sigma_cond == 1.0);

  Eigen::MatrixXd rho(2, 2);
  rho << 1.0, 0.5, 0.5, 1.0;
  const EllipticalModel bivariate(Eigen::VectorXd::Zero(2), rho, GaussianFamily{});
  const auto c2 = conditional_moments(bivariate, std::vector<double>{2.0});
  CHECK(c2.mu_cond == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c2.sigma_cond == doctest::Approx(std::sqrt(0.75)).epsilon(1e-14));
  CHECK(c2.m_x == doctest::Approx(4.0).epsilon(1e-14));

  Eigen::VectorXd mu(3);
  mu << 0, 0, 3;
  const EllipticalModel indep(mu, Eigen::MatrixXd::Identity(3, 3), GaussianFamily{});
  CHECK(conditional_moments(indep, std::vector<double>{5, -1}).mu_cond == 3.0);

  Eigen::MatrixXd degenerate(2, 2);
  degenerate << 1.0, 1.0 - 1e-14, 1.0 - 1e-14, 1.0;
  const EllipticalModel near_singular(Eigen::VectorXd::Zero(2), degenerate, GaussianFamily{});
  CHECK_THROWS_AS(conditional_moments(near_singular, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("conditional moments are affine equivariant in Y") {
  Eigen::MatrixXd sigma(3, 3);
  sigma << 1.0, 0.2, 0.4, 0.2, 2.0, -0.3, 0.4, -0.3, 1.5;
  Eigen::VectorXd mu(3);
  mu << 0.1, -0.2, 0.7;
  const std::vector<double> x{0.4, 1.1};
  const EllipticalModel base(mu, sigma, StudentFamily{3});
  const double s = 2.5, t = -1.25;
  Eigen::MatrixXd scaled = sigma;
  scaled.row(2) *= s;
  scaled.col(2) *= s;
  Eigen::VectorXd shifted = mu;
  shifted(2) = s * mu(2) + t;
  const EllipticalModel transformed(shifted, scaled, StudentFamily{3});
  const auto a = conditional_moments(base, x);
  const auto b = conditional_moments(transformed, x);
  CHECK(b.sigma_cond == doctest::Approx(s * a.sigma_cond).epsilon(1e-13));
  CHECK(b.mu_cond == doctest::Approx(s * a.mu_cond + t).epsilon(1e-13));
  CHECK(b.m_x == doctest::Approx(a.m_x).epsilon(1e-14));
}

TEST_CASE("sampling is deterministic and restricted to samplable families") {
  const auto model = identity_student(2, 4);
  CHECK(sample(model, 500, 42) == sample(model, 500, 42));
  CHECK_FALSE(sample(model, 500, 42) == sample(model, 500, 43));
  const EllipticalModel slash(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), SlashFamily{2});
  CHECK_THROWS_AS(sample(slash, 10, 1), DomainError);
}

TEST_CASE("gaussian sample moments and whitening") {
  Eigen::MatrixXd sigma(3, 3);
  sigma << 2.0, 0.5, 0.1, 0.5, 1.0, -0.3, 0.1, -0.3, 0.8;
  const EllipticalModel model(Eigen::VectorXd::Zero(3), sigma, GaussianFamily{});
  const std::size_t n = 100000;
  const auto data = sample(model, n, 7);
  Eigen::MatrixXd z(n, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto col = whitened_component(data, model, j);
    for (std::size_t i = 0; i < n; ++i) z(i, j) = col[i];
  }
  const Eigen::RowVectorXd mean = z.colwise().mean();
  for (int j = 0; j < 3; ++j) CHECK(std::fabs(mean(j)) < 5.0 / std::sqrt(double(n)));
  const Eigen::MatrixXd cov = (z.rowwise() - mean).transpose() * (z.rowwise() - mean) / double(n - 1);
  CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).norm() < 0.05);

  const auto m = mahalanobis_values(data, model);
  for (std::size_t i = 0; i < 20; ++i)
    CHECK(m[i] == doctest::Approx(z.row(i).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("student sample: tail index of the first whitened component") {
  const auto model = identity_student(2, 4);
  const std::size_t n = 1000000;
  const auto data = sample(model, n, 11);
  const auto w = whitened_component(data, model.leading_block(3), 0);
  const auto k = static_cast<std::size_t>(std::floor(std::pow(double(n), 0.6)));
  CHECK(std::fabs(hill(w, k) - 0.5) < 0.1);
}

TEST_CASE("marginal consistency: two-sample KS on the first coordinate") {
  const std::size_t n = 100000;
  const auto joint = sample(identity_student(2, 4), n, 101);
  const auto direct = sample(identity_student(2, 3), n, 202);
  const double d = ks_statistic(joint.column(0), direct.column(0));
  const double critical = 1.628 * std::sqrt(2.0 / double(n));
  CHECK(d < critical);
}
