#include "core/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace ecrisk {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(7);
  out << v;
  return out.str();
}

ConditionCheck make_check(std::string name, bool pass, std::string inequality) {
  return ConditionCheck{std::move(name), pass, std::move(inequality)};
}

}  // namespace

void SequenceSchedule::validate() const {
  if (!(a > 0.0)) throw DomainError("schedule: a must be positive");
  if (!(b > 0.0 && b < 1.0)) throw DomainError("schedule: b must lie in (0, 1)");
  if (!(c > 0.0)) throw DomainError("schedule: c must be positive");
  if (!(rho < 0.0)) throw DomainError("schedule: rho must be negative");
  if (!(gamma_ref > 0.0)) throw DomainError("schedule: gamma_ref must be positive");
}

std::size_t SequenceSchedule::k(std::size_t n) const {
  if (n < 2) throw DomainError("schedule: need n >= 2");
  const double power = std::pow(static_cast<double>(n), b);
  // pow(1e5, 0.6) evaluates to 999.99999999999977; snap near-integers first.
  const double nearest = std::round(power);
  const double raw = std::fabs(power - nearest) <= 1e-9 * nearest ? nearest : std::floor(power);
  const auto k = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(k, n - 1);
}

double SequenceSchedule::bandwidth(std::size_t n) const {
  return std::pow(static_cast<double>(n), -c);
}

double SequenceSchedule::tail(std::size_t n) const {
  return std::pow(static_cast<double>(n), -a);
}

std::optional<double> SequenceSchedule::theta() const {
  const double denom = a + b - 1.0;
  if (std::fabs(denom) < 1e-14) return std::nullopt;
  return a / denom;
}

bool ConditionReport::passes(const std::string& name) const { return get(name).pass; }

const ConditionCheck& ConditionReport::get(const std::string& name) const {
  for (const auto& check : checks)
    if (check.name == name) return check;
  throw DomainError("unknown condition '" + name + "'");
}

ConditionReport check_conditions(const SequenceSchedule& s) {
  ConditionReport report;
  report.theta = s.theta();
  report.theta_degenerate = !report.theta.has_value();

  // (C): k -> inf, h -> 0, k = o(n h), sqrt(k) h^2 -> 0, sqrt(k) A(n/k) -> 0 with A(t) ~ t^rho.
  const double rho_bound = -2.0 * s.rho / (1.0 - 2.0 * s.rho);
  const bool c_ok = s.b > 0.0 && s.c > 0.0 && s.b < 1.0 - s.c && s.b < 4.0 * s.c && s.b < rho_bound;
  report.checks.push_back(make_check(
      "C", c_ok,
      "b < 1 - c (" + fmt(s.b) + " < " + fmt(1.0 - s.c) + "), b < 4c (" + fmt(s.b) + " < " +
          fmt(4.0 * s.c) + "), b < -2rho/(1-2rho) (" + fmt(s.b) + " < " + fmt(rho_bound) + ")"));

  const bool int_ok = s.a < 1.0;
  report.checks.push_back(make_check("C_int", int_ok, "a < 1 (" + fmt(s.a) + ")"));

  const bool high_ok = s.a > 1.0 && report.theta.has_value() && *report.theta >= 0.0;
  std::string high_text = "a > 1 (" + fmt(s.a) + ")";
  if (report.theta) high_text += ", theta = a/(a+b-1) = " + fmt(*report.theta);
  else high_text += ", theta undefined (a + b = 1)";
  report.checks.push_back(make_check("C_high", high_ok, high_text));

  const double denom = s.gamma_ref * static_cast<double>(s.N) + 1.0;
  const auto refinement = [&](const std::string& suffix, double exponent) {
    const double bound = s.a * exponent / denom;
    const bool rate_ok = 0.5 * s.b < bound;
    const std::string rate_text = "b/2 < a*" + fmt(exponent) + "/(gamma N + 1) (" + fmt(0.5 * s.b) +
                                  " < " + fmt(bound) + ")";
    const bool int_extra = s.b < 2.0 * s.a;
    report.checks.push_back(make_check("C_int_" + suffix, int_ok && int_extra && rate_ok,
                                       "C_int, b < 2a (" + fmt(s.b) + " < " + fmt(2.0 * s.a) +
                                           "), " + rate_text));
    report.checks.push_back(make_check("C_high_" + suffix, high_ok && rate_ok, "C_high, " + rate_text));
  };
  refinement("HG", std::min(-s.rho, 2.0 * s.gamma_ref));
  refinement("Lp", std::min(-s.rho, s.gamma_ref));
  return report;
}

std::string MeasureKind::tag() const {
  std::ostringstream out;
  switch (type) {
    case MeasureType::Quantile:
      return "quantile";
    case MeasureType::LpQuantile:
      out << "lp:" << p;
      return out.str();
    case MeasureType::HaezendonckGoovaerts:
      out << "hg:" << p;
      return out.str();
  }
  return "quantile";
}

MeasureKind MeasureKind::parse(const std::string& tag) {
  if (tag == "quantile" || tag == "q") return {};
  const auto colon = tag.find(':');
  if (colon == std::string::npos) throw DomainError("unknown measure '" + tag + "'");
  const std::string head = tag.substr(0, colon);
  double p = 0.0;
  try {
    std::size_t used = 0;
    p = std::stod(tag.substr(colon + 1), &used);
    if (used != tag.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw DomainError("measure '" + tag + "' has a malformed order p");
  }
  if (!(p >= 1.0)) throw DomainError("measure '" + tag + "': p must be >= 1");
  if (head == "lp") return {MeasureType::LpQuantile, p};
  if (head == "hg") return {MeasureType::HaezendonckGoovaerts, p};
  throw DomainError("unknown measure '" + tag + "' (expected quantile, lp:<p> or hg:<p>)");
}

std::string to_string(QuantileRegime regime) {
  return regime == QuantileRegime::Intermediate ? "intermediate" : "high";
}

// Written as t / (2t + ell (1 - 2t)) so that ell = 1 returns t exactly.
double reduced_tail(double ell, double tail) {
  return tail / (2.0 * tail + ell * (1.0 - 2.0 * tail));
}

double intermediate_asymptotic_variance(double gamma, std::size_t N) {
  const double n = static_cast<double>(N);
  const double denom = gamma * n + 1.0;
  return n * n * std::pow(gamma, 4) / std::pow(denom, 4);
}

double high_asymptotic_variance(double gamma, std::size_t N, double theta) {
  const double n = static_cast<double>(N);
  const double denom = gamma * n + 1.0;
  const double inner = gamma / denom - theta * n * gamma * gamma / (denom * denom);
  return inner * inner;
}

void set_ratio_interval(RiskEstimate& e) {
  const double half = kNormal975 * e.se_ratio;
  const double lo = e.value * (1.0 - half);
  const double hi = e.value * (1.0 + half);
  e.ci_low = std::min(lo, hi);
  e.ci_high = std::max(lo, hi);
}

namespace {

void check_inputs(std::span<const double> w, const ExtremalEstimate& est) {
  if (w.size() < 2) throw DomainError("quantile estimator: need at least two observations");
  if (est.n != 0 && est.n != w.size())
    throw DomainError("quantile estimator: extremal estimate was built on a different sample size");
  if (!(est.eta_hat > 0.0)) throw DomainError("quantile estimator: eta_hat must be positive");
  if (!(est.ell_hat > 0.0)) throw DomainError("quantile estimator: ell_hat must be positive");
}

}  // namespace

QuantileRegime schedule_regime(const SequenceSchedule& schedule) {
  return schedule.a < 1.0 ? QuantileRegime::Intermediate : QuantileRegime::High;
}

RiskEstimate intermediate_quantile(std::span<const double> w, const ConditionalMoments& cond,
                                   const ExtremalEstimate& est, const SequenceSchedule& schedule) {
  check_inputs(w, est);
  const std::size_t n = w.size();
  RiskEstimate out;
  out.regime = QuantileRegime::Intermediate;
  out.tail = schedule.tail(n);
  out.level = 1.0 - out.tail;
  out.location = cond.mu_cond;
  out.scale = cond.sigma_cond;
  if (!check_conditions(schedule).passes("C_int"))
    out.warnings.push_back("condition C_int fails (a >= 1): intermediate regime asymptotics do not apply");

  double v = reduced_tail(est.ell_hat, out.tail);
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "intermediate quantile: v_n = " << v << " is not a valid tail probability";
    throw DomainError(msg.str());
  }
  if (v >= 1.0) {
    out.warnings.push_back("v_n = " + fmt(v) + " >= 1; order statistic index clamped to n");
    v = 1.0;
  }
  std::size_t rank = static_cast<std::size_t>(std::floor(static_cast<double>(n) * v)) + 1;
  if (rank > n) {
    if (v < 1.0) out.warnings.push_back("order statistic index floor(n v_n) + 1 clamped to n");
    rank = n;
  }
  out.order_rank = rank;
  const double w_rank = descending_order_statistic(w, rank);
  if (!(w_rank > 0.0)) {
    std::ostringstream msg;
    msg << "intermediate quantile: order statistic W_[" << rank << "] = " << w_rank
        << " is not positive (v_n = " << v << ")";
    throw DomainError(msg.str());
  }
  out.radial = std::pow(w_rank, 1.0 / est.eta_hat);
  out.value = out.location + out.scale * out.radial;
  const double gamma = est.gamma_hat;
  const double rate = std::fabs(std::log(out.tail)) / std::sqrt(static_cast<double>(est.k));
  out.se_ratio = rate * std::sqrt(intermediate_asymptotic_variance(gamma, est.N));
  set_ratio_interval(out);
  return out;
}

RiskEstimate high_quantile(std::span<const double> w, const ConditionalMoments& cond,
                           const ExtremalEstimate& est, const SequenceSchedule& schedule) {
  check_inputs(w, est);
  const std::size_t n = w.size();
  const std::size_t k = est.k;
  if (k < 1 || k + 1 > n) throw DomainError("high quantile: need 1 <= k and k + 1 <= n");
  RiskEstimate out;
  out.regime = QuantileRegime::High;
  out.tail = schedule.tail(n);
  out.level = 1.0 - out.tail;
  out.location = cond.mu_cond;
  out.scale = cond.sigma_cond;
  const ConditionReport conditions = check_conditions(schedule);
  if (!conditions.passes("C_high"))
    out.warnings.push_back("condition C_high fails (a <= 1): high regime asymptotics do not apply");

  out.order_rank = k + 1;
  const double w_k = descending_order_statistic(w, k + 1);
  if (!(w_k > 0.0)) {
    std::ostringstream msg;
    msg << "high quantile: order statistic W_[k+1] = " << w_k << " is not positive (k = " << k << ")";
    throw DomainError(msg.str());
  }
  const double extrapolation = static_cast<double>(k) / static_cast<double>(n) *
                               (2.0 + est.ell_hat * (1.0 / out.tail - 2.0));
  if (!(extrapolation > 0.0) || !std::isfinite(extrapolation))
    throw DomainError("high quantile: extrapolation factor k/(n v_n) is not positive");
  out.radial = std::exp((std::log(w_k) + est.gamma_hat * std::log(extrapolation)) / est.eta_hat);
  out.value = out.location + out.scale * out.radial;

  double theta;
  if (conditions.theta) {
    theta = *conditions.theta;
  } else {
    theta = std::log(out.tail) / std::log(static_cast<double>(n) * out.tail / static_cast<double>(k));
    out.warnings.push_back("theta undefined for a + b = 1; using the finite-n ratio " + fmt(theta));
  }
  double log_rate = std::log(static_cast<double>(k) / (static_cast<double>(n) * out.tail));
  if (!(log_rate > 0.0)) {
    out.warnings.push_back("k / (n (1 - alpha_n)) <= 1: level is not beyond the data");
    log_rate = std::fabs(log_rate);
  }
  const double rate = log_rate / std::sqrt(static_cast<double>(k));
  out.se_ratio = rate * std::sqrt(high_asymptotic_variance(est.gamma_hat, est.N, theta));
  set_ratio_interval(out);
  return out;
}

}  // namespace ecrisk
