#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/oracles.hpp"
#include "core/special.hpp"

using namespace ecrisk;

TEST_CASE("table 1 rows") {
  const auto student = table1_coefficients(StudentFamily{2.0}, 3, 1.0);
  CHECK(student.eta == 2.5);
  CHECK(student.ell == doctest::Approx(5.292757).epsilon(2e-6));

  const auto gaussian = table1_coefficients(GaussianFamily{}, 3, 2.0);
  CHECK(gaussian.eta == 1.0);
  CHECK(gaussian.ell == 1.0);

  const auto single = table1_coefficients(UgmFamily{{1.0}, {0.7}}, 2, 1.3);
  CHECK(single.ell == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(single.eta == 1.0);

  const auto mix = table1_coefficients(UgmFamily{{0.3, 0.7}, {0.5, 2.0}}, 2, 1.0);
  CHECK(mix.ell > 0.0);

  const auto slash = table1_coefficients(SlashFamily{3.0}, 2, 1.5);
  CHECK(slash.eta == doctest::Approx(2.0 / 3.0 + 1.0));
  CHECK_THROWS_AS(table1_coefficients(StudentFamily{-1.0}, 2, 1.0), DomainError);
}

TEST_CASE("table 1 agrees with the generic generator formula") {
  for (double nu : {1.0, 2.0, 3.5, 10.0}) {
    for (std::size_t N : {1u, 2u, 3u, 5u}) {
      for (double m : {0.1, 1.0, 4.0}) {
        const double closed = table1_coefficients(StudentFamily{nu}, N, m).ell;
        CHECK(ell_from_generator(StudentFamily{nu}, N, m) ==
              doctest::Approx(closed).epsilon(1e-10));
      }
    }
  }
  for (double a : {0.5, 2.0, 4.0}) {
    for (std::size_t N : {1u, 3u}) {
      const double closed = table1_coefficients(SlashFamily{a}, N, 0.8).ell;
      CHECK(ell_from_generator(SlashFamily{a}, N, 0.8) == doctest::Approx(closed).epsilon(1e-10));
    }
  }
}

TEST_CASE("student generator at the paper point") {
  CHECK(generator_value(StudentFamily{2.0}, 3, 1.0) ==
        doctest::Approx(0.030629383078988447).epsilon(1e-12));
  CHECK(generator_value(GaussianFamily{}, 1, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * special::kPi)).epsilon(1e-14));
}

TEST_CASE("student conditional quantile and tvar") {
  CHECK(student_conditional_quantile(2.0, 3, 1.0, 0.5) == 0.0);
  CHECK(student_conditional_scale(2.0, 3, 1.0) == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
  for (int i = 0; i < 50; ++i) {
    const double alpha = 0.5 + 0.5 * (i + 0.5) / 50.0;
    CHECK(student_conditional_tvar(2.0, 3, 1.0, alpha) >= student_conditional_quantile(2.0, 3, 1.0, alpha));
  }
  CHECK(student_conditional_tvar(2.0, 3, 1.0, 0.99) == doctest::Approx(3.44883676).epsilon(1e-8));
  CHECK_THROWS_AS(student_conditional_quantile(2.0, 3, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(student_conditional_tvar(0.5, 0, 1.0, 0.9), DomainError);
}

TEST_CASE("quantile regression anchor round trip") {
  const double tail = special::student_sf(2.0, 1530.15);
  CHECK(tail == doctest::Approx(2.1355e-7).epsilon(1e-4));
  CHECK(special::student_quantile_upper(2.0, tail) == doctest::Approx(1530.15).epsilon(1e-10));
  CHECK(student_conditional_quantile_upper(2.0, 3, 1.0, tail) == doctest::Approx(26.1708).epsilon(1e-5));
}

TEST_CASE("numeric quantile and Lp-quantile") {
  const auto law = student_conditional_law(2.0, 3, 1.0);
  for (double alpha : {0.6, 0.9, 0.99, 0.999}) {
    const double exact = student_conditional_quantile(2.0, 3, 1.0, alpha);
    CHECK(std::fabs(numeric_lp_quantile(law, alpha, 1.0) - exact) < 1e-6);
    CHECK(std::fabs(numeric_quantile(law, alpha) - exact) < 1e-8);
  }
  CHECK(std::fabs(numeric_lp_quantile(law, 0.5, 2.0)) < 1e-8);

  double previous = -1e300;
  for (double alpha = 0.55; alpha < 0.9999; alpha = 1.0 - (1.0 - alpha) * 0.6) {
    const double lp = numeric_lp_quantile(law, alpha, 2.0);
    CHECK(lp >= previous);
    previous = lp;
  }

  const double tail = 1e-6;
  const double q = student_conditional_quantile_upper(2.0, 3, 1.0, tail);
  CHECK(std::fabs(numeric_lp_quantile(law, 1.0 - tail, 2.0) / q / 0.757858 - 1.0) < 0.02);
}

TEST_CASE("numeric HG measure") {
  const auto law = student_conditional_law(2.0, 3, 1.0);
  CHECK(numeric_hg(law, 0.99, 1.0) ==
        doctest::Approx(student_conditional_tvar(2.0, 3, 1.0, 0.99)).epsilon(1e-4));
  for (double shift : {-3.0, 2.5, 100.0}) {
    const auto moved = shift_law(law, shift);
    CHECK(std::fabs(numeric_hg(moved, 0.95, 2.0) - numeric_hg(law, 0.95, 2.0) - shift) < 1e-8);
  }
  for (double alpha : {0.9, 0.99, 0.999}) {
    CHECK(numeric_hg(law, alpha, 1.5) >= numeric_quantile(law, alpha));
  }
  const double tail = 1e-6;
  const double q = student_conditional_quantile_upper(2.0, 3, 1.0, tail);
  CHECK(std::fabs(numeric_hg(law, 1.0 - tail, 1.0) / q / 1.25 - 1.0) < 0.02);
}

TEST_CASE("numeric moments") {
  const auto law = student_conditional_law(2.0, 3, 1.0);
  CHECK(numeric_upper_moment(law, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(numeric_lower_moment(law, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  const double z = 2.0;
  CHECK(numeric_upper_moment(law, z, 0.0) ==
        doctest::Approx(1.0 - special::student_cdf(5.0, z / std::sqrt(0.6))).epsilon(1e-9));
  CHECK_THROWS_AS(numeric_upper_moment(law, 0.0, 5.0), DomainError);
}
