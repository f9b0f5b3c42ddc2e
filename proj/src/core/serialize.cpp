#include "core/serialize.hpp"

#include <cstdio>
#include <sstream>

#include "core/error.hpp"

namespace ecrisk {

namespace {

const Json& require(const Json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw DomainError(where + ": missing key '" + key + "'");
  return doc.at(key);
}

double number(const Json& value, const std::string& what) {
  if (!value.is_number()) throw DomainError(what + " must be a number");
  return value.get<double>();
}

std::vector<double> number_array(const Json& value, const std::string& what) {
  if (!value.is_array()) throw DomainError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : value) out.push_back(number(v, what + " entry"));
  return out;
}

std::size_t count(const Json& value, const std::string& what) {
  if (!value.is_number_integer() && !value.is_number_unsigned()) throw DomainError(what + " must be an integer");
  const auto v = value.get<long long>();
  if (v < 0) throw DomainError(what + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(source + ": invalid JSON (" + e.what() + ")");
  }
}

Family family_from_json(const Json& doc) {
  const Json& name_json = require(doc, "family", "model");
  if (!name_json.is_string()) throw DomainError("model: 'family' must be a string");
  const std::string name = name_json.get<std::string>();
  Family family;
  if (name == "gaussian") {
    family = GaussianFamily{};
  } else if (name == "student") {
    family = StudentFamily{number(require(doc, "nu", "student model"), "nu")};
  } else if (name == "slash") {
    family = SlashFamily{number(require(doc, "a", "slash model"), "a")};
  } else if (name == "ugm") {
    family = UgmFamily{number_array(require(doc, "weights", "ugm model"), "weights"),
                       number_array(require(doc, "rates", "ugm model"), "rates")};
  } else {
    throw DomainError("model: unknown family '" + name + "' (expected gaussian, student, ugm or slash)");
  }
  validate_family(family);
  return family;
}

EllipticalModel model_from_json(const Json& doc) {
  const Family family = family_from_json(doc);
  const std::vector<double> mu = number_array(require(doc, "mu", "model"), "mu");
  const Json& sigma_json = require(doc, "sigma", "model");
  if (!sigma_json.is_array() || sigma_json.size() != mu.size())
    throw DomainError("model: sigma must be an array of " + std::to_string(mu.size()) + " rows");
  const auto d = static_cast<Eigen::Index>(mu.size());
  Eigen::MatrixXd sigma(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto row = number_array(sigma_json.at(static_cast<std::size_t>(i)), "sigma row");
    if (row.size() != mu.size())
      throw DomainError("model: sigma row " + std::to_string(i + 1) + " has the wrong length");
    for (Eigen::Index j = 0; j < d; ++j) sigma(i, j) = row[static_cast<std::size_t>(j)];
  }
  return EllipticalModel(Eigen::Map<const Eigen::VectorXd>(mu.data(), d), sigma, family);
}

Json model_to_json(const EllipticalModel& model) {
  Json out;
  out["family"] = family_name(model.family());
  if (const auto* s = std::get_if<StudentFamily>(&model.family())) out["nu"] = s->nu;
  if (const auto* s = std::get_if<SlashFamily>(&model.family())) out["a"] = s->a;
  if (const auto* u = std::get_if<UgmFamily>(&model.family())) {
    out["weights"] = u->weights;
    out["rates"] = u->rates;
  }
  const auto d = model.mu().size();
  out["mu"] = std::vector<double>(model.mu().data(), model.mu().data() + d);
  Json sigma = Json::array();
  for (Eigen::Index i = 0; i < d; ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < d; ++j) row.push_back(model.sigma()(i, j));
    sigma.push_back(row);
  }
  out["sigma"] = sigma;
  return out;
}

Json to_json(const ConditionalMoments& cond) {
  return Json{{"mu_cond", cond.mu_cond}, {"sigma_cond", cond.sigma_cond}, {"m_x", cond.m_x}};
}

Json to_json(const ExtremalEstimate& est) {
  return Json{{"gamma_hat", est.gamma_hat}, {"eta_hat", est.eta_hat}, {"g_hat", est.g_hat},
              {"ell_hat", est.ell_hat},     {"se_eta", est.se_eta()},   {"se_ell", est.se_ell()},
              {"regime", to_string(est.regime)}, {"k", est.k},        {"h", est.h},
              {"n", est.n}};
}

Json to_json(const RiskEstimate& est) {
  return Json{{"kind", est.kind.tag()},
              {"level", est.level},
              {"tail", est.tail},
              {"value", est.value},
              {"location", est.location},
              {"scale", est.scale},
              {"radial", est.radial},
              {"factor", est.factor},
              {"se_ratio", est.se_ratio},
              {"ci_low", est.ci_low},
              {"ci_high", est.ci_high},
              {"regime", to_string(est.regime)},
              {"order_rank", est.order_rank},
              {"warnings", est.warnings}};
}

Json to_json(const ConditionReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks)
    checks.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"inequality", c.inequality}});
  return Json{{"checks", checks}, {"theta", optional_json(report.theta)},
              {"theta_degenerate", report.theta_degenerate}};
}

Json to_json(const SequenceSchedule& s) {
  return Json{{"a", s.a}, {"b", s.b}, {"c", s.c}, {"rho", s.rho}, {"gamma_ref", s.gamma_ref}, {"N", s.N}};
}

Json to_json(const ExperimentReport& report) {
  Json sizes = Json::array();
  for (const auto& size : report.sizes) {
    Json measures = Json::array();
    for (const auto& m : size.measures) {
      Json rel = nullptr;
      if (m.relative_error) {
        const auto& f = *m.relative_error;
        rel = Json{{"min", f[0]}, {"q1", f[1]}, {"median", f[2]}, {"q3", f[3]}, {"max", f[4]}};
      }
      measures.push_back(Json{{"measure", m.measure.tag()},
                              {"oracle", m.oracle},
                              {"successes", m.successes},
                              {"failed_replicates", m.failed_replicates},
                              {"empirical_variance", optional_json(m.empirical_variance)},
                              {"asymptotic_variance", m.asymptotic_variance},
                              {"coverage", m.coverage},
                              {"relative_error", rel},
                              {"mean_estimate", optional_json(m.mean_estimate)},
                              {"median_abs_relative_error", optional_json(m.median_abs_relative_error)},
                              {"kurtosis", optional_json(m.kurtosis)}});
    }
    sizes.push_back(Json{{"n", size.n},
                         {"k", size.k},
                         {"h", size.h},
                         {"tail", size.tail},
                         {"level", 1.0 - size.tail},
                         {"eta_true", size.eta_true},
                         {"ell_true", size.ell_true},
                         {"extremal_successes", size.extremal_successes},
                         {"mean_eta", optional_json(size.mean_eta)},
                         {"median_abs_eta_error", optional_json(size.median_abs_eta_error)},
                         {"mean_ell", optional_json(size.mean_ell)},
                         {"median_abs_ell_error", optional_json(size.median_abs_ell_error)},
                         {"measures", measures}});
  }
  return Json{{"regime", to_string(report.regime)}, {"gamma_true", report.gamma_true},
              {"N", report.N},                      {"m_x", report.m_x},
              {"theta", optional_json(report.theta)}, {"sizes", sizes}};
}

Json to_json(const RealDataResult& r) {
  Json estimates = Json::array();
  for (const auto& e : r.estimates) estimates.push_back(to_json(e));
  Json sigma = Json::array();
  for (Eigen::Index i = 0; i < r.moments.sigma.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < r.moments.sigma.cols(); ++j) row.push_back(r.moments.sigma(i, j));
    sigma.push_back(row);
  }
  const auto d = r.moments.mu.size();
  return Json{{"n_total", r.n_total},
              {"n_learning", r.n_learning},
              {"mu", std::vector<double>(r.moments.mu.data(), r.moments.mu.data() + d)},
              {"sigma", sigma},
              {"x", r.x},
              {"a_auto", r.a_auto},
              {"schedule", to_json(r.schedule)},
              {"level", r.schedule.level(r.n_learning)},
              {"regime", to_string(r.regime)},
              {"conditional", to_json(r.step.cond)},
              {"extremal", to_json(r.step.est)},
              {"conditions", to_json(r.conditions)},
              {"estimates", estimates}};
}

SequenceSchedule schedule_from_json(const Json& doc, SequenceSchedule s) {
  if (doc.is_null()) return s;
  if (!doc.is_object()) throw DomainError("schedule must be an object");
  if (doc.contains("a")) s.a = number(doc.at("a"), "schedule.a");
  if (doc.contains("b")) s.b = number(doc.at("b"), "schedule.b");
  if (doc.contains("c")) s.c = number(doc.at("c"), "schedule.c");
  if (doc.contains("rho")) s.rho = number(doc.at("rho"), "schedule.rho");
  if (doc.contains("gamma_ref")) s.gamma_ref = number(doc.at("gamma_ref"), "schedule.gamma_ref");
  if (doc.contains("N")) s.N = count(doc.at("N"), "schedule.N");
  s.validate();
  return s;
}

std::vector<MeasureKind> measures_from_json(const Json& doc) {
  if (doc.is_null()) return {MeasureKind{}};
  if (!doc.is_array() || doc.empty()) throw DomainError("measures must be a non-empty array of tags");
  std::vector<MeasureKind> out;
  for (const auto& m : doc) {
    if (!m.is_string()) throw DomainError("measure tags must be strings");
    out.push_back(MeasureKind::parse(m.get<std::string>()));
  }
  return out;
}

std::pair<ExperimentPlan, Json> plan_from_json(const Json& config) {
  if (!config.is_object()) throw DomainError("montecarlo config must be a JSON object");
  EllipticalModel model = model_from_json(require(config, "model", "montecarlo config"));
  const std::vector<double> x = number_array(require(config, "x", "montecarlo config"), "x");
  SequenceSchedule defaults;
  defaults.N = model.dimension() - 1;
  if (const auto gamma = family_tail_index(model.family())) {
    defaults.gamma_ref = *gamma;
    defaults.rho = -2.0 * *gamma;
  }
  const SequenceSchedule schedule =
      schedule_from_json(config.contains("schedule") ? config.at("schedule") : Json(nullptr), defaults);

  std::vector<std::size_t> sizes;
  const Json& sizes_json = require(config, "sizes", "montecarlo config");
  if (!sizes_json.is_array()) throw DomainError("sizes must be an array of integers");
  for (const auto& s : sizes_json) sizes.push_back(count(s, "sizes entry"));

  ExperimentPlan plan{std::move(model), x, schedule, sizes, 100, {MeasureKind{}}, 1,
                      KernelType::Gaussian, std::nullopt, 0};
  if (config.contains("replicates")) plan.replicates = count(config.at("replicates"), "replicates");
  plan.measures = measures_from_json(config.contains("measures") ? config.at("measures") : Json(nullptr));
  if (config.contains("seed")) plan.base_seed = count(config.at("seed"), "seed");
  if (config.contains("kernel")) {
    if (!config.at("kernel").is_string()) throw DomainError("kernel must be a string");
    plan.kernel = parse_kernel(config.at("kernel").get<std::string>());
  }
  if (config.contains("regime") && !config.at("regime").is_null()) {
    const Json& r = config.at("regime");
    if (!r.is_string()) throw DomainError("regime must be a string");
    const std::string name = r.get<std::string>();
    if (name == "high") plan.regime = QuantileRegime::High;
    else if (name == "intermediate") plan.regime = QuantileRegime::Intermediate;
    else throw DomainError("regime must be 'high' or 'intermediate', got '" + name + "'");
  }
  if (config.contains("threads")) plan.threads = static_cast<unsigned>(count(config.at("threads"), "threads"));
  plan.validate();

  Json measures = Json::array();
  for (const auto& m : plan.measures) measures.push_back(m.tag());
  Json resolved{{"model", model_to_json(plan.model)},
                {"x", plan.x},
                {"schedule", to_json(plan.schedule)},
                {"sizes", plan.sizes},
                {"replicates", plan.replicates},
                {"measures", measures},
                {"seed", plan.base_seed},
                {"kernel", to_string(plan.kernel)},
                {"regime", to_string(plan.resolved_regime())}};
  return {std::move(plan), std::move(resolved)};
}

std::string records_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "n,measure,replicate,estimate,oracle,ratio,standardized_error,ci_low,ci_high,hit\n";
  for (const auto& r : report.records) {
    out << r.n << ',' << r.measure.tag() << ',' << r.replicate << ',';
    if (r.ok) {
      out << format_double(r.estimate) << ',' << format_double(r.oracle) << ',' << format_double(r.ratio)
          << ',' << format_double(r.standardized_error) << ',' << format_double(r.ci_low) << ','
          << format_double(r.ci_high) << ',' << (r.hit ? 1 : 0) << '\n';
    } else {
      out << ',' << format_double(r.oracle) << ",,,,,0\n";
    }
  }
  return out.str();
}

}  // namespace ecrisk
