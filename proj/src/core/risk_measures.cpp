#include "core/risk_measures.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/special.hpp"

namespace ecrisk {

namespace {

void check_gamma_p(const char* what, double gamma, double p) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    std::ostringstream msg;
    msg << what << ": gamma must be positive, got " << gamma;
    throw DomainError(msg.str());
  }
  if (!(p >= 1.0) || !std::isfinite(p)) {
    std::ostringstream msg;
    msg << what << ": p must be >= 1, got " << p;
    throw DomainError(msg.str());
  }
}

}  // namespace

double conditional_tail_index(double gamma, std::size_t N) {
  if (!(gamma > 0.0)) throw DomainError("conditional_tail_index: gamma must be positive");
  if (std::isinf(gamma)) return N == 0 ? gamma : 1.0 / static_cast<double>(N);
  return 1.0 / (1.0 / gamma + static_cast<double>(N));
}

double lp_factor(double gamma, double p) {
  check_gamma_p("f_L", gamma, p);
  if (p == 1.0) return 1.0;
  if (!(gamma * (p - 1.0) < 1.0)) {
    std::ostringstream msg;
    msg << "f_L: the Lp-quantile requires gamma < 1/(p-1) = " << 1.0 / (p - 1.0) << ", got gamma = "
        << gamma;
    throw DomainError(msg.str());
  }
  const double log_b = special::log_beta(p, 1.0 / gamma - p + 1.0);
  return std::exp(-gamma * (std::log(gamma) - log_b));
}

double hg_factor(double gamma, double p) {
  check_gamma_p("f_H", gamma, p);
  if (!(gamma * p < 1.0)) {
    std::ostringstream msg;
    msg << "f_H: the HG measure requires gamma < 1/p = " << 1.0 / p << ", got gamma = " << gamma;
    throw DomainError(msg.str());
  }
  if (p == 1.0) return 1.0 / (1.0 - gamma);
  const double inv = 1.0 / gamma;
  const double log_value = -std::log(gamma) + (p * gamma - 1.0) * std::log(inv - p) -
                           gamma * (p - 1.0) * std::log(p) + gamma * special::log_beta(inv - p, p);
  return std::exp(log_value);
}

namespace {

void check_definition_guard(const char* what, const ExtremalEstimate& est, double p, std::size_t N) {
  const double n = static_cast<double>(N);
  if (p <= n) return;
  if (!(est.gamma_hat * (p - n) < 1.0)) {
    std::ostringstream msg;
    msg << what << ": requires p <= N or gamma_hat < 1/(p-N); got p = " << p << ", N = " << N
        << ", gamma_hat = " << est.gamma_hat << " (conditional index "
        << conditional_tail_index(est.gamma_hat, N) << ", bound 1/p = " << 1.0 / p << ")";
    throw DomainError(msg.str());
  }
}

RiskEstimate rescale(const RiskEstimate& base, MeasureKind kind, double factor) {
  if (base.kind.type != MeasureType::Quantile)
    throw DomainError("risk measure conversion expects a plain quantile estimate");
  RiskEstimate out = base;
  out.kind = kind;
  out.factor = factor;
  out.radial = base.radial * factor;
  out.value = out.location + out.scale * out.radial;
  set_ratio_interval(out);
  return out;
}

}  // namespace

RiskEstimate lp_quantile_estimate(const RiskEstimate& base, const ExtremalEstimate& est, double p,
                                  std::size_t N) {
  check_gamma_p("lp_quantile_estimate", est.gamma_hat, p);
  check_definition_guard("lp_quantile_estimate", est, p, N);
  const double factor = lp_factor(conditional_tail_index(est.gamma_hat, N), p);
  return rescale(base, {MeasureType::LpQuantile, p}, factor);
}

RiskEstimate hg_estimate(const RiskEstimate& base, const ExtremalEstimate& est, double p,
                         std::size_t N) {
  check_gamma_p("hg_estimate", est.gamma_hat, p);
  check_definition_guard("hg_estimate", est, p, N);
  const double factor = hg_factor(conditional_tail_index(est.gamma_hat, N), p);
  return rescale(base, {MeasureType::HaezendonckGoovaerts, p}, factor);
}

RiskEstimate convert_estimate(const RiskEstimate& base, const ExtremalEstimate& est,
                              const MeasureKind& kind, std::size_t N) {
  switch (kind.type) {
    case MeasureType::Quantile:
      return base;
    case MeasureType::LpQuantile:
      return lp_quantile_estimate(base, est, kind.p, N);
    case MeasureType::HaezendonckGoovaerts:
      return hg_estimate(base, est, kind.p, N);
  }
  return base;
}

}  // namespace ecrisk
