#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/serialize.hpp"

using namespace ecrisk;

namespace {

ReturnsTable student_table(std::size_t n, std::uint64_t seed) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(4, 4);
  sigma(0, 3) = sigma(3, 0) = 0.4;
  sigma(1, 2) = sigma(2, 1) = -0.2;
  const EllipticalModel model(Eigen::VectorXd::Constant(4, 0.001), sigma * 1e-4, StudentFamily{3.0});
  ReturnsTable table;
  table.names = {"A", "B", "C", "Y"};
  table.values = sample(model, n, seed);
  return table;
}

}  // namespace

TEST_CASE("sample CSV round trip keeps every bit") {
  const SampleMatrix data(3, 2, {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::nextafter(1.0, 2.0), -0.0});
  const auto text = sample_to_csv(data);
  const auto back = sample_from_csv(text);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 2);
  CHECK(back.data() == data.data());
  CHECK(sample_to_csv(back) == text);

  const auto path = (std::filesystem::temp_directory_path() / "ecrisk_roundtrip.csv").string();
  write_sample_csv(path, data);
  CHECK(read_sample_csv(path).data() == data.data());
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_sample_csv(path), IoError);
}

TEST_CASE("sample CSV errors") {
  CHECK_THROWS_AS(sample_from_csv(""), IoError);
  CHECK_THROWS_AS(sample_from_csv("1,2\n3\n"), IoError);
  CHECK_THROWS_AS(sample_from_csv("1,2\n3,abc\n"), IoError);
  CHECK_THROWS_AS(sample_from_csv("1,nan\n"), IoError);
}

TEST_CASE("RFC 4180 parsing") {
  const auto records = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,\"two\nlines\",3\n", "t");
  REQUIRE(records.size() == 2);
  CHECK(records[0][1] == "b,c");
  CHECK(records[0][2] == "say \"hi\"");
  CHECK(records[1][1] == "two\nlines");
  CHECK_THROWS_AS(parse_csv("a,\"open\n", "t"), IoError);
}

TEST_CASE("returns tables") {
  const std::string text =
      "Date,A,B,Y\n"
      "2020-01-01,0.01,0.02,0.03\n"
      "2020-01-02,-0.01,0.00,0.015\n"
      "2020-01-03,0.005,-0.02,0.001\n";
  const auto table = parse_returns(text, {"B", "A"}, "Y");
  CHECK(table.rows() == 3);
  CHECK(table.dates == std::vector<std::string>{"2020-01-01", "2020-01-02", "2020-01-03"});
  CHECK(table.names == std::vector<std::string>{"B", "A", "Y"});
  CHECK(table.values(1, 0) == 0.0);
  CHECK(table.values(1, 1) == -0.01);
  CHECK(table.values(2, 2) == 0.001);

  const auto no_dates = parse_returns("A,Y\n1,2\n3,4\n", {"A"}, "Y");
  CHECK(no_dates.dates.empty());

  try {
    parse_returns("Date,A,Y\n", {"A"}, "Y");
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("empty table") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_returns("", {"A"}, "Y"), IoError);
  try {
    parse_returns(text, {"A", "Z"}, "Y");
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("'Z'") != std::string::npos);
  }
  try {
    parse_returns("Date,A,Y\nd1,1,2\nd2,x,3\nd3,4,5\nd4,5,?\n", {"A"}, "Y");
    FAIL("expected an error");
  } catch (const IoError& e) {
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);
    CHECK(what.find("row 5") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_returns(text, {"A", "Y"}, "Y"), DomainError);
  CHECK_THROWS_AS(load_returns("/nonexistent/returns.csv", {"A"}, "Y"), IoError);
}

TEST_CASE("moment estimation") {
  const EllipticalModel standard(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), GaussianFamily{});
  const auto m = estimate_moments(sample(standard, 100000, 5));
  CHECK(m.mu.cwiseAbs().maxCoeff() < 0.02);
  CHECK((m.sigma - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
  CHECK(m.sigma.isApprox(m.sigma.transpose(), 0.0));

  const SampleMatrix tiny(3, 1, {1.0, 2.0, 6.0});
  const auto t = estimate_moments(tiny);
  CHECK(t.mu(0) == 3.0);
  CHECK(t.sigma(0, 0) == 7.0);

  const SampleMatrix twins(4, 3, {1, 1, 0.5, 2, 2, -1, 3, 3, 2, 5, 5, 0});
  try {
    estimate_moments(twins, {"P", "Q", "R"});
    FAIL("expected an error");
  } catch (const DomainError& e) {
    const std::string what = e.what();
    CHECK(what.find("singular") != std::string::npos);
    CHECK(what.find("P") != std::string::npos);
    CHECK(what.find("Q") != std::string::npos);
  }
  CHECK_THROWS_AS(estimate_moments(SampleMatrix(2, 2, {1, 2, 3, 4})), DomainError);
}

TEST_CASE("real-data pipeline equals the composition of its modules") {
  const auto table = student_table(20000, 11);
  RealDataOptions options;
  options.a = 1.2;
  options.measures = {MeasureKind{}, MeasureKind::parse("hg:1")};
  const auto result = real_data_pipeline(table, options);
  CHECK(result.n_total == 20000);
  CHECK(result.n_learning == 19999);
  CHECK_FALSE(result.a_auto);

  const std::vector<double>& all = table.values.data();
  const SampleMatrix learning(19999, 4, std::vector<double>(all.begin(), all.begin() + 19999 * 4));
  const auto moments = estimate_moments(learning);
  const EllipticalModel joint(moments.mu, moments.sigma, GaussianFamily{});
  const std::vector<double> x{table.values(19999, 0), table.values(19999, 1), table.values(19999, 2)};
  CHECK(result.x == x);
  SequenceSchedule schedule;
  schedule.a = 1.2;
  schedule.N = 3;
  const auto step = extremal_step(learning, joint, x, schedule, KernelType::Gaussian);
  schedule.gamma_ref = step.est.gamma_hat;
  const auto manual = risk_step(step, schedule, QuantileRegime::High, options.measures);
  REQUIRE(result.estimates.size() == 2);
  CHECK(result.estimates[0].value == manual[0].value);
  CHECK(result.estimates[1].value == manual[1].value);
  CHECK(result.step.est.ell_hat == step.est.ell_hat);
  CHECK(result.step.cond.m_x == doctest::Approx(mahalanobis(joint.leading_block(3), x)));
  CHECK(to_json(result).contains("estimates"));
}

TEST_CASE("real-data pipeline auto level and singular point") {
  const auto table = student_table(5000, 3);
  const auto result = real_data_pipeline(table, RealDataOptions{});
  CHECK(result.a_auto);
  CHECK(result.schedule.a == doctest::Approx(0.4 * result.step.est.eta_hat).epsilon(1e-15));
  CHECK(result.estimates[0].level == doctest::Approx(1.0 - std::pow(4999.0, -result.schedule.a)));

  RealDataOptions at_mean;
  const std::vector<double>& all = table.values.data();
  const SampleMatrix learning(4999, 4, std::vector<double>(all.begin(), all.begin() + 4999 * 4));
  const auto moments = estimate_moments(learning);
  at_mean.x = std::vector<double>{moments.mu(0), moments.mu(1), moments.mu(2)};
  CHECK_THROWS_AS(real_data_pipeline(table, at_mean), DomainError);
}
