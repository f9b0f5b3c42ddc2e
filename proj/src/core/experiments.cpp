#include "core/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "core/error.hpp"
#include "core/oracles.hpp"
#include "core/risk_measures.hpp"

namespace ecrisk {

ExtremalStep extremal_step(const SampleMatrix& data, const EllipticalModel& joint,
                           std::span<const double> x, const SequenceSchedule& schedule,
                           KernelType kernel) {
  const std::size_t d = joint.dimension();
  if (d < 2) throw DomainError("pipeline: the model needs at least one covariate and a response");
  if (data.cols() != d) {
    std::ostringstream msg;
    msg << "pipeline: sample has " << data.cols() << " columns, model has dimension " << d;
    throw DomainError(msg.str());
  }
  const std::size_t N = d - 1;
  const EllipticalModel covariates = joint.leading_block(N);
  ExtremalStep step;
  step.cond = conditional_moments(joint, x);
  step.w = whitened_component(data, covariates, 0);
  const std::vector<double> m_values = mahalanobis_values(data, covariates);
  const std::size_t n = data.rows();
  step.est = estimate_extremal(step.w, m_values, step.cond.m_x, N, schedule.k(n),
                               KernelConfig{schedule.bandwidth(n), kernel});
  return step;
}

std::vector<RiskEstimate> risk_step(const ExtremalStep& step, const SequenceSchedule& schedule,
                                    QuantileRegime regime, const std::vector<MeasureKind>& measures) {
  const RiskEstimate base = regime == QuantileRegime::High
                                ? high_quantile(step.w, step.cond, step.est, schedule)
                                : intermediate_quantile(step.w, step.cond, step.est, schedule);
  std::vector<RiskEstimate> out;
  out.reserve(measures.size());
  for (const auto& kind : measures) out.push_back(convert_estimate(base, step.est, kind, step.est.N));
  return out;
}

void ExperimentPlan::validate() const {
  schedule.validate();
  if (replicates < 1) throw DomainError("experiment: replicates must be >= 1");
  if (sizes.empty()) throw DomainError("experiment: at least one sample size is required");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 3) throw DomainError("experiment: sample sizes must be >= 3");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw DomainError("experiment: sizes must be strictly increasing");
  }
  if (measures.empty()) throw DomainError("experiment: at least one measure is required");
  if (!std::holds_alternative<StudentFamily>(model.family()))
    throw DomainError("experiment: oracles exist only for the student family, got " +
                      family_name(model.family()));
  if (x.size() + 1 != model.dimension()) {
    std::ostringstream msg;
    msg << "experiment: covariate point has length " << x.size() << ", model expects "
        << model.dimension() - 1;
    throw DomainError(msg.str());
  }
}

QuantileRegime ExperimentPlan::resolved_regime() const {
  return regime ? *regime : schedule_regime(schedule);
}

std::pair<double, double> asymptotic_variance_table(const SequenceSchedule& schedule, double gamma,
                                                    std::size_t N) {
  const double intermediate = intermediate_asymptotic_variance(gamma, N);
  const auto theta = schedule.theta();
  const double high = theta ? high_asymptotic_variance(gamma, N, *theta)
                            : std::numeric_limits<double>::quiet_NaN();
  return {intermediate, high};
}

double regime_rate(QuantileRegime regime, std::size_t n, std::size_t k, double tail) {
  const double root_k = std::sqrt(static_cast<double>(k));
  if (regime == QuantileRegime::Intermediate) return root_k / std::fabs(std::log(tail));
  return root_k / std::fabs(std::log(static_cast<double>(k) / (static_cast<double>(n) * tail)));
}

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw DomainError("five-number summary of an empty set");
  std::sort(values.begin(), values.end());
  auto at = [&](double prob) {
    const double pos = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ECRISK_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct ReplicateOutcome {
  bool extremal_ok = false;
  double eta = 0.0;
  double ell = 0.0;
  std::vector<ReplicateRecord> records;
};

double measure_oracle(const ExperimentPlan& plan, const ConditionalMoments& cond, const MeasureKind& kind,
                      double tail) {
  const double nu = std::get<StudentFamily>(plan.model.family()).nu;
  const std::size_t N = plan.model.dimension() - 1;
  double standardized = 0.0;
  if (kind.type == MeasureType::Quantile) {
    standardized = student_conditional_quantile_upper(nu, N, cond.m_x, tail);
  } else if (kind.type == MeasureType::HaezendonckGoovaerts && kind.p == 1.0) {
    standardized = student_conditional_tvar_upper(nu, N, cond.m_x, tail);
  } else {
    const UnivariateLaw law = student_conditional_law(nu, N, cond.m_x);
    standardized = kind.type == MeasureType::LpQuantile ? numeric_lp_quantile(law, 1.0 - tail, kind.p)
                                                        : numeric_hg(law, 1.0 - tail, kind.p);
  }
  return cond.mu_cond + cond.sigma_cond * standardized;
}

template <class T>
std::optional<double> mean_of(const std::vector<T>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::optional<double> median_of(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  return five_number_summary(std::move(values))[2];
}

void summarize_measure(MeasureSummary& summary, const std::vector<const ReplicateRecord*>& records) {
  std::vector<double> errors;
  std::vector<double> relative;
  std::vector<double> abs_relative;
  std::vector<double> estimates;
  for (const auto* r : records) {
    if (!r->ok) {
      summary.failed_replicates.push_back(r->replicate);
      continue;
    }
    ++summary.successes;
    if (r->hit) ++summary.coverage;
    errors.push_back(r->standardized_error);
    relative.push_back(r->ratio - 1.0);
    abs_relative.push_back(std::fabs(r->ratio - 1.0));
    estimates.push_back(r->estimate);
  }
  if (errors.size() >= 2) {
    const double mean = *mean_of(errors);
    double m2 = 0.0;
    double m4 = 0.0;
    for (double e : errors) {
      const double dev = e - mean;
      m2 += dev * dev;
      m4 += dev * dev * dev * dev;
    }
    const auto count = static_cast<double>(errors.size());
    summary.empirical_variance = m2 / (count - 1.0);
    if (errors.size() >= 4 && m2 > 0.0) summary.kurtosis = (m4 / count) / ((m2 / count) * (m2 / count));
  }
  if (!relative.empty()) summary.relative_error = five_number_summary(relative);
  summary.mean_estimate = mean_of(estimates);
  summary.median_abs_relative_error = median_of(abs_relative);
}

}  // namespace

ExperimentReport run(const ExperimentPlan& plan) {
  plan.validate();
  const QuantileRegime regime = plan.resolved_regime();
  const double nu = std::get<StudentFamily>(plan.model.family()).nu;
  const std::size_t N = plan.model.dimension() - 1;
  const ConditionalMoments cond = conditional_moments(plan.model, plan.x);
  const TheoreticalCoefficients truth = table1_coefficients(plan.model.family(), N, cond.m_x);
  const double gamma_true = 1.0 / nu;

  ExperimentReport report;
  report.regime = regime;
  report.gamma_true = gamma_true;
  report.N = N;
  report.m_x = cond.m_x;
  report.theta = plan.schedule.theta();

  const unsigned threads =
      std::min<unsigned>(resolve_threads(plan.threads), static_cast<unsigned>(plan.replicates));

  for (std::size_t n : plan.sizes) {
    SizeSummary size;
    size.n = n;
    size.k = plan.schedule.k(n);
    size.h = plan.schedule.bandwidth(n);
    size.tail = plan.schedule.tail(n);
    size.eta_true = truth.eta;
    size.ell_true = truth.ell;
    const double rate = regime_rate(regime, n, size.k, size.tail);

    std::vector<double> oracles;
    for (const auto& kind : plan.measures) oracles.push_back(measure_oracle(plan, cond, kind, size.tail));

    std::vector<ReplicateOutcome> outcomes(plan.replicates);
    auto work = [&](std::size_t i) {
      ReplicateOutcome& out = outcomes[i];
      const std::uint64_t seed = plan.base_seed + i;
      std::vector<RiskEstimate> estimates;
      std::string failure;
      try {
        const SampleMatrix data = sample(plan.model, n, seed);
        const ExtremalStep step = extremal_step(data, plan.model, plan.x, plan.schedule, plan.kernel);
        out.extremal_ok = true;
        out.eta = step.est.eta_hat;
        out.ell = step.est.ell_hat;
        estimates = risk_step(step, plan.schedule, regime, plan.measures);
      } catch (const std::exception& e) {
        failure = e.what();
      }
      for (std::size_t j = 0; j < plan.measures.size(); ++j) {
        ReplicateRecord rec;
        rec.n = n;
        rec.measure = plan.measures[j];
        rec.replicate = i;
        rec.seed = seed;
        rec.oracle = oracles[j];
        if (estimates.empty()) {
          rec.error = failure;
        } else {
          const RiskEstimate& est = estimates[j];
          rec.ok = true;
          rec.estimate = est.value;
          rec.ratio = est.value / rec.oracle;
          rec.standardized_error = rate * (rec.ratio - 1.0);
          rec.ci_low = est.ci_low;
          rec.ci_high = est.ci_high;
          rec.hit = est.ci_low <= rec.oracle && rec.oracle <= est.ci_high;
        }
        out.records.push_back(std::move(rec));
      }
    };

    if (threads <= 1) {
      for (std::size_t i = 0; i < plan.replicates; ++i) work(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < plan.replicates; i = next++) work(i);
        });
      for (auto& th : pool) th.join();
    }

    std::vector<double> etas;
    std::vector<double> eta_errors;
    std::vector<double> ells;
    std::vector<double> ell_errors;
    for (const auto& out : outcomes) {
      if (!out.extremal_ok) continue;
      etas.push_back(out.eta);
      eta_errors.push_back(std::fabs(out.eta - truth.eta));
      ells.push_back(out.ell);
      ell_errors.push_back(std::fabs(out.ell - truth.ell));
    }
    size.extremal_successes = etas.size();
    size.mean_eta = mean_of(etas);
    size.median_abs_eta_error = median_of(eta_errors);
    size.mean_ell = mean_of(ells);
    size.median_abs_ell_error = median_of(ell_errors);

    for (std::size_t j = 0; j < plan.measures.size(); ++j) {
      MeasureSummary summary;
      summary.measure = plan.measures[j];
      summary.oracle = oracles[j];
      summary.asymptotic_variance =
          regime == QuantileRegime::Intermediate
              ? intermediate_asymptotic_variance(gamma_true, N)
              : (report.theta ? high_asymptotic_variance(gamma_true, N, *report.theta) : 0.0);
      std::vector<const ReplicateRecord*> column;
      for (const auto& out : outcomes) column.push_back(&out.records[j]);
      summarize_measure(summary, column);
      size.measures.push_back(std::move(summary));
    }
    for (std::size_t j = 0; j < plan.measures.size(); ++j)
      for (const auto& out : outcomes) report.records.push_back(out.records[j]);
    report.sizes.push_back(std::move(size));
  }
  return report;
}

}  // namespace ecrisk
