#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/extremal.hpp"
#include "core/quantile.hpp"

using namespace ecrisk;

namespace {

SequenceSchedule paper_schedule() {
  SequenceSchedule s;
  s.a = 1.25;
  s.b = 0.6;
  s.c = 0.2;
  s.rho = -1.0;
  s.gamma_ref = 0.5;
  s.N = 3;
  return s;
}

std::vector<double> pareto_grid(std::size_t n, double gamma) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(double(i + 1) / double(n + 1), -gamma);
  return w;
}

ExtremalEstimate make_estimate(const std::vector<double>& w, std::size_t k, double ell, std::size_t N) {
  const auto eta = estimate_eta(w, k, N);
  ExtremalEstimate e;
  e.gamma_hat = eta.gamma;
  e.eta_hat = eta.eta;
  e.ell_hat = ell;
  e.k = k;
  e.n = w.size();
  e.N = N;
  return e;
}

}  // namespace

TEST_CASE("schedule sequences") {
  const auto s = paper_schedule();
  CHECK(s.k(100000) == 1000);
  CHECK(s.k(1000) == 63);
  CHECK(s.bandwidth(100000) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(s.tail(10000) == doctest::Approx(1e-5).epsilon(1e-14));
  CHECK(*s.theta() == doctest::Approx(1.25 / 0.85).epsilon(1e-15));
  SequenceSchedule degenerate = s;
  degenerate.a = 0.4;
  CHECK_FALSE(degenerate.theta().has_value());
  SequenceSchedule bad = s;
  bad.b = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("condition checks on the paper schedule") {
  const auto report = check_conditions(paper_schedule());
  CHECK(report.passes("C"));
  CHECK(report.passes("C_high"));
  CHECK(report.passes("C_high_HG"));
  CHECK_FALSE(report.passes("C_high_Lp"));
  CHECK_FALSE(report.passes("C_int"));
  CHECK(*report.theta == doctest::Approx(1.470588).epsilon(1e-6));
  CHECK_THROWS_AS(report.passes("nope"), DomainError);

  auto s = paper_schedule();
  s.a = 0.5;
  const auto intermediate = check_conditions(s);
  CHECK_FALSE(intermediate.passes("C_high"));
  CHECK(intermediate.passes("C_int"));

  s.a = 1.047146;
  CHECK(check_conditions(s).passes("C_high"));

  s.a = 0.4;
  const auto degenerate = check_conditions(s);
  CHECK(degenerate.theta_degenerate);
  CHECK_FALSE(degenerate.passes("C_high"));

  s = paper_schedule();
  s.b = 0.9;
  CHECK_FALSE(check_conditions(s).passes("C"));
}

TEST_CASE("measure tags") {
  CHECK(MeasureKind::parse("quantile") == MeasureKind{});
  CHECK(MeasureKind::parse("lp:2").tag() == "lp:2");
  CHECK(MeasureKind::parse("hg:1") == MeasureKind{MeasureType::HaezendonckGoovaerts, 1.0});
  CHECK(MeasureKind::parse("hg:1.5").tag() == "hg:1.5");
  CHECK_THROWS_AS(MeasureKind::parse("lp:0.5"), DomainError);
  CHECK_THROWS_AS(MeasureKind::parse("var:2"), DomainError);
  CHECK_THROWS_AS(MeasureKind::parse("lp:x"), DomainError);
}

TEST_CASE("reduced tail equals the tail at ell = 1") {
  for (int e = 2; e < 40; ++e) {
    const double tail = std::ldexp(1.0, -e);
    CHECK(reduced_tail(1.0, tail) == tail);
  }
  for (double tail : {0.4, 0.1, 1e-3, 3.3e-5, 1e-9, 1.0 / 3.0}) CHECK(reduced_tail(1.0, tail) == tail);
  for (std::size_t n : {1000u, 12345u, 100000u, 1000000u}) {
    const double tail = std::pow(double(n), -1.25);
    CHECK(reduced_tail(1.0, tail) == tail);
  }
}

TEST_CASE("asymptotic variances") {
  CHECK(intermediate_asymptotic_variance(0.5, 3) == doctest::Approx(0.0144).epsilon(1e-14));
  CHECK(intermediate_asymptotic_variance(0.5, 0) == 0.0);
  CHECK(std::fabs(high_asymptotic_variance(0.5, 3, *paper_schedule().theta()) - 0.0005536332) < 1e-9);
}

TEST_CASE("intermediate quantile reduces to the empirical quantile") {
  const std::size_t n = 20000;
  const auto w = pareto_grid(n, 0.4);
  auto s = paper_schedule();
  s.a = 0.7;
  s.N = 1;
  ExtremalEstimate e;
  e.gamma_hat = 0.4;
  e.eta_hat = 1.0;
  e.ell_hat = 1.0;
  e.k = 100;
  e.n = n;
  e.N = 1;
  const ConditionalMoments cond{0.0, 1.0, 1.0};
  const auto q = intermediate_quantile(w, cond, e, s);
  const auto rank = static_cast<std::size_t>(std::floor(double(n) * s.tail(n))) + 1;
  CHECK(q.order_rank == rank);
  CHECK(q.value == descending_order_statistic(w, rank));
  CHECK(q.ci_low <= q.value);
  CHECK(q.value <= q.ci_high);
  CHECK(q.warnings.empty());
  CHECK(q.regime == QuantileRegime::Intermediate);
}

TEST_CASE("quantile estimators are location-scale equivariant") {
  const std::size_t n = 50000;
  const auto w = pareto_grid(n, 0.5);
  const auto s = paper_schedule();
  const auto e = make_estimate(w, s.k(n), 4.2, 3);
  auto inter = s;
  inter.a = 0.8;
  for (auto estimator : {&high_quantile, &intermediate_quantile}) {
    const auto& schedule = estimator == &high_quantile ? s : inter;
    const auto base = estimator(w, ConditionalMoments{0.0, 1.5, 1.0}, e, schedule);
    for (double scale : {0.25, 2.0, 8.0}) {
      for (double shift : {-3.0, 0.0, 12.5}) {
        const auto moved = estimator(w, ConditionalMoments{shift, 1.5 * scale, 1.0}, e, schedule);
        CHECK(moved.value == shift + scale * base.value);
      }
    }
    const auto general = estimator(w, ConditionalMoments{0.3, 1.1, 1.0}, e, schedule);
    const auto mapped = estimator(w, ConditionalMoments{-2.0 + 3.7 * 0.3, 3.7 * 1.1, 1.0}, e, schedule);
    CHECK(mapped.value == doctest::Approx(-2.0 + 3.7 * general.value).epsilon(1e-14));
  }
}

TEST_CASE("high quantile is nondecreasing in the level") {
  const std::size_t n = 50000;
  const auto w = pareto_grid(n, 0.5);
  auto s = paper_schedule();
  const auto e = make_estimate(w, s.k(n), 3.0, 3);
  double previous = -1.0;
  for (double a = 1.01; a < 2.0; a += 0.05) {
    s.a = a;
    const double v = high_quantile(w, ConditionalMoments{0, 1, 1}, e, s).value;
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("unit extrapolation and regime agreement") {
  const std::size_t n = 40000;
  const auto w = pareto_grid(n, 0.5);
  auto s = paper_schedule();
  const std::size_t k = s.k(n);
  // Choose ell so that k / (n v_n) = 1 at the schedule level.
  const double tail = s.tail(n);
  const double ell = (double(n) / double(k) - 2.0) / (1.0 / tail - 2.0);
  const auto e = make_estimate(w, k, ell, 3);
  const auto high = high_quantile(w, ConditionalMoments{0, 1, 1}, e, s);
  const double expected = std::pow(descending_order_statistic(w, k + 1), 1.0 / e.eta_hat);
  CHECK(high.value == doctest::Approx(expected).epsilon(1e-12));

  // Crossover: the intermediate estimator at the same level uses rank k + 1 (or k).
  const auto inter = intermediate_quantile(w, ConditionalMoments{0, 1, 1}, e, s);
  CHECK((inter.order_rank == k + 1 || inter.order_rank == k));
  const double alt = std::pow(descending_order_statistic(w, inter.order_rank), 1.0 / e.eta_hat);
  CHECK(inter.value == alt);
  CHECK(std::fabs(inter.value / high.value - 1.0) < 1e-3);
  CHECK_FALSE(inter.warnings.empty());
}

TEST_CASE("quantile errors and warnings") {
  const std::size_t n = 1000;
  std::vector<double> w(n, -1.0);
  for (std::size_t i = 0; i < 10; ++i) w[i] = 10.0 + double(i);
  auto s = paper_schedule();
  ExtremalEstimate e;
  e.gamma_hat = 0.5;
  e.eta_hat = 2.5;
  e.ell_hat = 2.0;
  e.k = 63;
  e.n = n;
  e.N = 3;
  CHECK_THROWS_AS(high_quantile(w, ConditionalMoments{0, 1, 1}, e, s), DomainError);
  s.a = 0.3;
  CHECK_THROWS_AS(intermediate_quantile(w, ConditionalMoments{0, 1, 1}, e, s), DomainError);

  const auto good = pareto_grid(n, 0.5);
  s = paper_schedule();
  s.a = 0.9;
  const auto warned = high_quantile(good, ConditionalMoments{0, 1, 1}, e, s);
  CHECK_FALSE(warned.warnings.empty());
  e.ell_hat = 3.0;
  s.a = 0.05;
  const auto clamped = intermediate_quantile(good, ConditionalMoments{0, 1, 1}, e, s);
  CHECK(clamped.order_rank == n);
  CHECK_FALSE(clamped.warnings.empty());
  e.n = 5;
  CHECK_THROWS_AS(high_quantile(good, ConditionalMoments{0, 1, 1}, e, s), DomainError);
}

TEST_CASE("confidence intervals bracket the value") {
  const std::size_t n = 30000;
  const auto w = pareto_grid(n, 0.5);
  const auto s = paper_schedule();
  const auto e = make_estimate(w, s.k(n), 5.0, 3);
  const auto q = high_quantile(w, ConditionalMoments{-4.0, 0.5, 1.0}, e, s);
  CHECK(q.ci_low <= q.value);
  CHECK(q.value <= q.ci_high);
  const double rate = std::sqrt(double(s.k(n))) / std::log(double(s.k(n)) / (double(n) * s.tail(n)));
  CHECK(q.se_ratio == doctest::Approx(std::sqrt(high_asymptotic_variance(e.gamma_hat, 3, *s.theta())) / rate));
}
