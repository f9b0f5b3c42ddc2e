#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/oracles.hpp"
#include "core/risk_measures.hpp"

using namespace ecrisk;

namespace {

RiskEstimate plain_estimate(double location, double scale, double radial) {
  RiskEstimate e;
  e.location = location;
  e.scale = scale;
  e.radial = radial;
  e.value = location + scale * radial;
  e.se_ratio = 0.05;
  set_ratio_interval(e);
  return e;
}

ExtremalEstimate extremal(double gamma) {
  ExtremalEstimate e;
  e.gamma_hat = gamma;
  e.eta_hat = 3.0 * gamma + 1.0;
  e.ell_hat = 5.0;
  return e;
}

}  // namespace

TEST_CASE("conditional tail index") {
  CHECK(conditional_tail_index(0.5, 3) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(conditional_tail_index(0.37, 0) == 0.37);
  CHECK(conditional_tail_index(std::numeric_limits<double>::infinity(), 4) == 0.25);
  CHECK(conditional_tail_index(1e12, 4) == doctest::Approx(0.25));
  CHECK_THROWS_AS(conditional_tail_index(0.0, 2), DomainError);
}

TEST_CASE("p = 1 identities hold exactly on a gamma grid") {
  for (int i = 1; i <= 20; ++i) {
    const double gamma = 0.9 * i / 21.0;
    CHECK(lp_factor(gamma, 1.0) == 1.0);
    CHECK(hg_factor(gamma, 1.0) == 1.0 / (1.0 - gamma));
  }
  CHECK(hg_factor(0.2, 1.0) == 1.25);
}

TEST_CASE("closed-form factor values") {
  CHECK(lp_factor(0.2, 2.0) == doctest::Approx(std::pow(4.0, -0.2)).epsilon(1e-13));
  CHECK(lp_factor(0.2, 2.0) == doctest::Approx(0.757858).epsilon(1e-6));
  // p -> 1 continuity of the general HG formula.
  CHECK(hg_factor(0.2, 1.0 + 1e-9) == doctest::Approx(1.25).epsilon(1e-7));
  CHECK(lp_factor(0.2, 1.0 + 1e-9) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(lp_factor(0.6, 3.0), DomainError);
  CHECK_THROWS_AS(hg_factor(0.5, 2.0), DomainError);
  CHECK_THROWS_AS(hg_factor(0.2, 0.5), DomainError);
  try {
    hg_factor(0.5, 2.0);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("1/p = 0.5") != std::string::npos);
  }
}

TEST_CASE("factors are continuous away from the existence boundary") {
  for (double gamma : {0.05, 0.1, 0.2, 0.3, 0.4}) {
    for (double p : {1.5, 2.0}) {
      CHECK(std::fabs(lp_factor(gamma + 1e-6, p) - lp_factor(gamma, p)) < 1e-3);
      CHECK(std::fabs(hg_factor(gamma + 1e-6, p) - hg_factor(gamma, p)) < 1e-3);
    }
  }
}

TEST_CASE("numeric oracle ratios converge to the factors") {
  const auto law = student_conditional_law(2.0, 3, 1.0);
  double previous_gap = std::numeric_limits<double>::infinity();
  for (double tail : {1e-3, 1e-4, 1e-5, 1e-6}) {
    const double q = numeric_quantile(law, 1.0 - tail);
    const double lp = numeric_lp_quantile(law, 1.0 - tail, 2.0);
    const double gap = std::fabs(lp / q - lp_factor(0.2, 2.0));
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
  CHECK(previous_gap < 0.02 * lp_factor(0.2, 2.0));

  const double tail = 1e-6;
  const double q = student_conditional_quantile_upper(2.0, 3, 1.0, tail);
  const double hg2 = numeric_hg(law, 1.0 - tail, 2.0);
  CHECK(std::fabs(hg2 / q / hg_factor(0.2, 2.0) - 1.0) < 0.02);
}

TEST_CASE("conversions rescale only the radial term") {
  const auto base = plain_estimate(-1.5, 2.0, 10.0);
  const auto est = extremal(0.5);

  const auto tvar = hg_estimate(base, est, 1.0, 3);
  CHECK(tvar.factor == 1.25);
  CHECK(tvar.radial == 12.5);
  CHECK(tvar.value == -1.5 + 2.0 * 12.5);
  CHECK(tvar.kind.tag() == "hg:1");
  CHECK(tvar.value >= base.value);
  CHECK((tvar.ci_high - tvar.ci_low) / tvar.value ==
        doctest::Approx((base.ci_high - base.ci_low) / base.value));

  const auto same = lp_quantile_estimate(base, est, 1.0, 3);
  CHECK(same.value == base.value);
  CHECK(same.ci_low == base.ci_low);
  CHECK(same.ci_high == base.ci_high);

  const auto expectile = convert_estimate(base, est, MeasureKind::parse("lp:2"), 3);
  CHECK(expectile.factor == doctest::Approx(lp_factor(0.2, 2.0)));
  CHECK(convert_estimate(base, est, MeasureKind{}, 3).value == base.value);

  for (double s : {0.5, 4.0, 16.0}) {
    const auto scaled = hg_estimate(plain_estimate(-1.5, 2.0 * s, 10.0), est, 2.0, 3);
    const auto reference = hg_estimate(base, est, 2.0, 3);
    CHECK(scaled.value - scaled.location == s * (reference.value - reference.location));
  }
}

TEST_CASE("definition guards") {
  const auto base = plain_estimate(0.0, 1.0, 3.0);
  CHECK_THROWS_AS(hg_estimate(base, extremal(0.5), 6.0, 3), DomainError);
  CHECK_THROWS_AS(lp_quantile_estimate(base, extremal(0.5), 6.0, 3), DomainError);
  CHECK_NOTHROW(hg_estimate(base, extremal(0.5), 3.0, 3));
  CHECK_NOTHROW(hg_estimate(base, extremal(0.3), 4.0, 3));
  CHECK_THROWS_AS(hg_estimate(base, extremal(0.5), 0.5, 3), DomainError);
  auto converted = hg_estimate(base, extremal(0.5), 1.0, 3);
  CHECK_THROWS_AS(hg_estimate(converted, extremal(0.5), 1.0, 3), DomainError);
}
