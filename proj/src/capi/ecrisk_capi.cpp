#include "ecrisk.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "core/error.hpp"
#include "core/experiments.hpp"
#include "core/extremal.hpp"
#include "core/io.hpp"
#include "core/oracles.hpp"
#include "core/quantile.hpp"
#include "core/risk_measures.hpp"
#include "core/serialize.hpp"

struct ecr_model {
  ecrisk::EllipticalModel model;
};

struct ecr_sample {
  ecrisk::SampleMatrix data;
};

namespace {

thread_local std::string g_last_error;

class ArgumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class F>
ecr_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return ECR_OK;
  } catch (const ecrisk::IoError& e) {
    g_last_error = e.what();
    return ECR_ERR_IO;
  } catch (const ecrisk::DomainError& e) {
    g_last_error = e.what();
    return ECR_ERR_DOMAIN;
  } catch (const ArgumentError& e) {
    g_last_error = e.what();
    return ECR_ERR_ARGUMENT;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON value: ") + e.what();
    return ECR_ERR_DOMAIN;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ECR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ECR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ECR_ERR_INTERNAL;
  }
}

template <class T>
void need(const T* ptr, const char* name) {
  if (ptr == nullptr) throw ArgumentError(std::string(name) + " must not be NULL");
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

ecrisk::Json parse_options(const char* json, const char* what) {
  if (json == nullptr || *json == '\0') return ecrisk::Json::object();
  ecrisk::Json doc = ecrisk::parse_json_text(json, what);
  if (!doc.is_object()) throw ecrisk::DomainError(std::string(what) + " must be a JSON object");
  return doc;
}

std::vector<double> number_list(const ecrisk::Json& value, const char* what) {
  if (!value.is_array()) throw ecrisk::DomainError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) throw ecrisk::DomainError(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string string_value(const ecrisk::Json& doc, const char* key, const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_string()) throw ecrisk::DomainError(std::string(key) + " must be a string");
  return doc.at(key).get<std::string>();
}

ecrisk::QuantileRegime parse_regime(const std::string& name) {
  if (name == "high") return ecrisk::QuantileRegime::High;
  if (name == "intermediate") return ecrisk::QuantileRegime::Intermediate;
  throw ecrisk::DomainError("regime must be 'high' or 'intermediate', got '" + name + "'");
}

}  // namespace

extern "C" {

const char* ecr_last_error(void) { return g_last_error.c_str(); }

const char* ecr_version(void) { return "1.0.0"; }

void ecr_string_free(char* text) { std::free(text); }

ecr_status ecr_model_from_json(const char* json, ecr_model** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    const auto doc = ecrisk::parse_json_text(json, "model JSON");
    *out = new ecr_model{ecrisk::model_from_json(doc)};
  });
}

ecr_status ecr_model_load(const char* path, ecr_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    const auto doc = ecrisk::parse_json_text(ecrisk::read_text_file(path), path);
    *out = new ecr_model{ecrisk::model_from_json(doc)};
  });
}

ecr_status ecr_model_to_json(const ecr_model* model, char** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = copy_string(ecrisk::model_to_json(model->model).dump());
  });
}

ecr_status ecr_model_dimension(const ecr_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->model.dimension();
  });
}

void ecr_model_free(ecr_model* model) { delete model; }

ecr_status ecr_sample_draw(const ecr_model* model, size_t n, uint64_t seed, ecr_sample** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    *out = new ecr_sample{ecrisk::sample(model->model, n, seed)};
  });
}

ecr_status ecr_sample_from_data(size_t rows, size_t cols, const double* data, ecr_sample** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    if (rows * cols > 0) need(data, "data");
    *out = new ecr_sample{ecrisk::SampleMatrix(rows, cols, std::vector<double>(data, data + rows * cols))};
  });
}

ecr_status ecr_sample_read_csv(const char* path, ecr_sample** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new ecr_sample{ecrisk::read_sample_csv(path)};
  });
}

ecr_status ecr_sample_write_csv(const ecr_sample* sample, const char* path) {
  return guarded([&] {
    need(sample, "sample");
    need(path, "path");
    ecrisk::write_sample_csv(path, sample->data);
  });
}

ecr_status ecr_sample_shape(const ecr_sample* sample, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(sample, "sample");
    if (rows) *rows = sample->data.rows();
    if (cols) *cols = sample->data.cols();
  });
}

ecr_status ecr_sample_data(const ecr_sample* sample, const double** data) {
  return guarded([&] {
    need(sample, "sample");
    need(data, "data");
    *data = sample->data.data().data();
  });
}

void ecr_sample_free(ecr_sample* sample) { delete sample; }

ecr_status ecr_mahalanobis(const ecr_model* covariates, const double* x, size_t len, double* out) {
  return guarded([&] {
    need(covariates, "covariates");
    need(out, "out");
    if (len > 0) need(x, "x");
    *out = ecrisk::mahalanobis(covariates->model, {x, len});
  });
}

ecr_status ecr_conditional_moments(const ecr_model* joint, const double* x, size_t len, double* mu_cond,
                                   double* sigma_cond, double* m_x) {
  return guarded([&] {
    need(joint, "joint");
    if (len > 0) need(x, "x");
    const auto cond = ecrisk::conditional_moments(joint->model, {x, len});
    if (mu_cond) *mu_cond = cond.mu_cond;
    if (sigma_cond) *sigma_cond = cond.sigma_cond;
    if (m_x) *m_x = cond.m_x;
  });
}

ecr_status ecr_hill(const double* w, size_t n, size_t k, double* out) {
  return guarded([&] {
    need(w, "w");
    need(out, "out");
    *out = ecrisk::hill({w, n}, k);
  });
}

ecr_status ecr_estimate(const ecr_model* joint, const ecr_sample* sample, const char* options_json,
                        char** out_json) {
  return guarded([&] {
    need(joint, "joint");
    need(sample, "sample");
    need(out_json, "out_json");
    using ecrisk::Json;
    const Json options = parse_options(options_json, "estimate options");
    if (!options.contains("x")) throw ecrisk::DomainError("estimate options: missing covariate point 'x'");
    const std::vector<double> x = number_list(options.at("x"), "x");
    ecrisk::SequenceSchedule defaults;
    if (joint->model.dimension() < 2) throw ecrisk::DomainError("estimate: model needs a covariate and a response");
    defaults.N = joint->model.dimension() - 1;
    const Json schedule_json = options.contains("schedule") ? options.at("schedule") : Json(nullptr);
    ecrisk::SequenceSchedule schedule = ecrisk::schedule_from_json(schedule_json, defaults);
    const auto kernel = ecrisk::parse_kernel(string_value(options, "kernel", "gaussian"));
    const auto measures =
        ecrisk::measures_from_json(options.contains("measures") ? options.at("measures") : Json(nullptr));

    const auto step = ecrisk::extremal_step(sample->data, joint->model, x, schedule, kernel);
    if (!(schedule_json.is_object() && schedule_json.contains("gamma_ref")) && step.est.gamma_hat > 0.0)
      schedule.gamma_ref = step.est.gamma_hat;
    const auto regime = options.contains("regime")
                            ? parse_regime(string_value(options, "regime", "high"))
                            : ecrisk::schedule_regime(schedule);
    const auto estimates = ecrisk::risk_step(step, schedule, regime, measures);

    Json measure_tags = Json::array();
    for (const auto& m : measures) measure_tags.push_back(m.tag());
    Json estimates_json = Json::array();
    for (const auto& e : estimates) estimates_json.push_back(ecrisk::to_json(e));
    const Json result{{"config",
                       {{"x", x},
                        {"schedule", ecrisk::to_json(schedule)},
                        {"kernel", ecrisk::to_string(kernel)},
                        {"regime", ecrisk::to_string(regime)},
                        {"measures", measure_tags}}},
                      {"conditional", ecrisk::to_json(step.cond)},
                      {"extremal", ecrisk::to_json(step.est)},
                      {"conditions", ecrisk::to_json(ecrisk::check_conditions(schedule))},
                      {"estimates", estimates_json}};
    *out_json = copy_string(result.dump());
  });
}

ecr_status ecr_check_conditions(const char* schedule_json, char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    const auto doc = parse_options(schedule_json, "schedule");
    const auto schedule = ecrisk::schedule_from_json(doc, ecrisk::SequenceSchedule{});
    ecrisk::Json result = ecrisk::to_json(ecrisk::check_conditions(schedule));
    result["schedule"] = ecrisk::to_json(schedule);
    *out_json = copy_string(result.dump());
  });
}

ecr_status ecr_conditional_tail_index(double gamma, size_t N, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ecrisk::conditional_tail_index(gamma, N);
  });
}

ecr_status ecr_f_l(double gamma, double p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ecrisk::lp_factor(gamma, p);
  });
}

ecr_status ecr_f_h(double gamma, double p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ecrisk::hg_factor(gamma, p);
  });
}

ecr_status ecr_table1(const char* family_json, size_t N, double m_x, double* eta, double* ell) {
  return guarded([&] {
    need(family_json, "family_json");
    const auto family = ecrisk::family_from_json(ecrisk::parse_json_text(family_json, "family JSON"));
    const auto coeff = ecrisk::table1_coefficients(family, N, m_x);
    if (eta) *eta = coeff.eta;
    if (ell) *ell = coeff.ell;
  });
}

ecr_status ecr_generator_value(const char* family_json, size_t N, double t, double* out) {
  return guarded([&] {
    need(family_json, "family_json");
    need(out, "out");
    const auto family = ecrisk::family_from_json(ecrisk::parse_json_text(family_json, "family JSON"));
    *out = ecrisk::generator_value(family, N, t);
  });
}

ecr_status ecr_student_conditional_quantile(double nu, size_t N, double m_x, double tail, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ecrisk::student_conditional_quantile_upper(nu, N, m_x, tail);
  });
}

ecr_status ecr_student_conditional_tvar(double nu, size_t N, double m_x, double tail, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ecrisk::student_conditional_tvar_upper(nu, N, m_x, tail);
  });
}

ecr_status ecr_student_numeric_lp(double nu, size_t N, double m_x, double alpha, double p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ecrisk::numeric_lp_quantile(ecrisk::student_conditional_law(nu, N, m_x), alpha, p);
  });
}

ecr_status ecr_student_numeric_hg(double nu, size_t N, double m_x, double alpha, double p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ecrisk::numeric_hg(ecrisk::student_conditional_law(nu, N, m_x), alpha, p);
  });
}

ecr_status ecr_asymptotic_variances(double gamma, size_t N, double theta, double* intermediate, double* high) {
  return guarded([&] {
    if (!(gamma > 0.0)) throw ecrisk::DomainError("gamma must be positive");
    if (intermediate) *intermediate = ecrisk::intermediate_asymptotic_variance(gamma, N);
    if (high) *high = ecrisk::high_asymptotic_variance(gamma, N, theta);
  });
}

ecr_status ecr_montecarlo(const char* config_json, char** report_json, char** records_csv) {
  return guarded([&] {
    need(config_json, "config_json");
    need(report_json, "report_json");
    const auto config = ecrisk::parse_json_text(config_json, "montecarlo config");
    auto [plan, resolved] = ecrisk::plan_from_json(config);
    const auto report = ecrisk::run(plan);
    const ecrisk::Json doc{{"config", resolved}, {"report", ecrisk::to_json(report)}};
    std::unique_ptr<char, void (*)(char*)> json_text(copy_string(doc.dump(2)), ecr_string_free);
    if (records_csv) *records_csv = copy_string(ecrisk::records_to_csv(report));
    *report_json = json_text.release();
  });
}

ecr_status ecr_real_data(const char* path, const char* options_json, char** out_json) {
  return guarded([&] {
    need(path, "path");
    need(out_json, "out_json");
    using ecrisk::Json;
    const Json options = parse_options(options_json, "real-data options");
    if (!options.contains("covariates") || !options.at("covariates").is_array())
      throw ecrisk::DomainError("real-data options: 'covariates' must list column names");
    std::vector<std::string> covariates;
    for (const auto& c : options.at("covariates")) {
      if (!c.is_string()) throw ecrisk::DomainError("real-data options: covariate names must be strings");
      covariates.push_back(c.get<std::string>());
    }
    const std::string target = string_value(options, "target", "");
    if (target.empty()) throw ecrisk::DomainError("real-data options: missing 'target' column");

    ecrisk::RealDataOptions opts;
    auto read_number = [&](const char* key, double& dst) {
      if (!options.contains(key) || options.at(key).is_null()) return;
      if (!options.at(key).is_number()) throw ecrisk::DomainError(std::string(key) + " must be a number");
      dst = options.at(key).get<double>();
    };
    read_number("b", opts.b);
    read_number("c", opts.c);
    read_number("rho", opts.rho);
    if (options.contains("a") && !options.at("a").is_null()) {
      double a = 0.0;
      read_number("a", a);
      opts.a = a;
    }
    opts.kernel = ecrisk::parse_kernel(string_value(options, "kernel", "gaussian"));
    opts.measures =
        ecrisk::measures_from_json(options.contains("measures") ? options.at("measures") : Json(nullptr));
    if (options.contains("x") && !options.at("x").is_null()) opts.x = number_list(options.at("x"), "x");

    const auto table = ecrisk::load_returns(path, covariates, target);
    const auto result = ecrisk::real_data_pipeline(table, opts);
    Json measure_tags = Json::array();
    for (const auto& m : opts.measures) measure_tags.push_back(m.tag());
    Json doc{{"config",
              {{"data", path},
               {"covariates", covariates},
               {"target", target},
               {"b", opts.b},
               {"c", opts.c},
               {"a", opts.a ? Json(*opts.a) : Json("auto")},
               {"rho", opts.rho},
               {"kernel", ecrisk::to_string(opts.kernel)},
               {"measures", measure_tags},
               {"x", result.x}}},
             {"result", ecrisk::to_json(result)}};
    *out_json = copy_string(doc.dump(2));
  });
}

}  // extern "C"
