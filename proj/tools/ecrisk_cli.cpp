#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ecrisk.h"

using Json = nlohmann::ordered_json;

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(ecr_status status) {
  if (status == ECR_OK) return;
  const int code = status == ECR_ERR_IO ? 2 : 1;
  throw Failure{code, ecr_last_error()};
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { ecr_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

struct Model {
  ecr_model* ptr = nullptr;
  ~Model() { ecr_model_free(ptr); }
};

struct Sample {
  ecr_sample* ptr = nullptr;
  ~Sample() { ecr_sample_free(ptr); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{2, "cannot open '" + path + "' for reading"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{2, "cannot write '" + path + "'"};
}

Json parse_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Failure{2, path + ": invalid JSON (" + e.what() + ")"};
  }
}

std::string fmt(double v, int digits = 7) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Options shared by every subcommand.
struct Common {
  bool json = false;
  std::uint64_t seed = 1;
  std::string config;
  unsigned threads = 0;
};

// Flags registered on a subcommand; each maps to one key of the resolved config.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  void number(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = numbers_.emplace_back(Entry<double>{key, 0.0, nullptr});
    slot.opt = app_->add_option(name, slot.value, help);
  }
  void integer(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = integers_.emplace_back(Entry<long long>{key, 0, nullptr});
    slot.opt = app_->add_option(name, slot.value, help);
  }
  void text(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = texts_.emplace_back(Entry<std::string>{key, {}, nullptr});
    slot.opt = app_->add_option(name, slot.value, help);
  }
  void numbers(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = vectors_.emplace_back(Entry<std::vector<double>>{key, {}, nullptr});
    slot.opt = app_->add_option(name, slot.value, help)->delimiter(',');
  }
  void integers(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = counts_.emplace_back(Entry<std::vector<long long>>{key, {}, nullptr});
    slot.opt = app_->add_option(name, slot.value, help)->delimiter(',');
  }
  void boolean(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = flags_.emplace_back(Entry<bool>{key, false, nullptr});
    slot.opt = app_->add_flag(name, slot.value, help);
  }
  void texts(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = lists_.emplace_back(Entry<std::vector<std::string>>{key, {}, nullptr});
    slot.opt = app_->add_option(name, slot.value, help)->delimiter(',');
  }

  // Flag values override config values; keys with a dot go one level deep.
  void apply(Json& cfg) const {
    auto set = [&](const std::string& key, Json value) {
      const auto dot = key.find('.');
      if (dot == std::string::npos) {
        cfg[key] = std::move(value);
      } else {
        Json& inner = cfg[key.substr(0, dot)];
        if (!inner.is_object()) inner = Json::object();
        inner[key.substr(dot + 1)] = std::move(value);
      }
    };
    for (const auto& e : numbers_) if (e.opt->count()) set(e.key, e.value);
    for (const auto& e : integers_) if (e.opt->count()) set(e.key, e.value);
    for (const auto& e : texts_) if (e.opt->count()) set(e.key, e.value);
    for (const auto& e : vectors_) if (e.opt->count()) set(e.key, e.value);
    for (const auto& e : lists_) if (e.opt->count()) set(e.key, e.value);
    for (const auto& e : counts_) if (e.opt->count()) set(e.key, e.value);
    for (const auto& e : flags_) if (e.opt->count()) set(e.key, e.value);
  }

 private:
  template <class T>
  struct Entry {
    std::string key;
    T value;
    CLI::Option* opt;
  };
  CLI::App* app_;
  std::deque<Entry<double>> numbers_;
  std::deque<Entry<long long>> integers_;
  std::deque<Entry<std::string>> texts_;
  std::deque<Entry<std::vector<double>>> vectors_;
  std::deque<Entry<std::vector<std::string>>> lists_;
  std::deque<Entry<std::vector<long long>>> counts_;
  std::deque<Entry<bool>> flags_;
};

struct Command {
  CLI::App* app;
  Common common;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  std::unique_ptr<Flags> flags;
};

Command& make_command(std::deque<Command>& cmds, CLI::App& root, const std::string& name,
                      const std::string& help) {
  Command& cmd = cmds.emplace_back();
  cmd.app = root.add_subcommand(name, help);
  cmd.app->add_flag("--json", cmd.common.json, "Print machine-readable JSON");
  cmd.app->add_option("--config", cmd.common.config, "JSON file holding the full run configuration");
  cmd.flags = std::make_unique<Flags>(cmd.app);
  return cmd;
}

void add_seed_threads(Command& cmd) {
  cmd.seed_opt = cmd.app->add_option("--seed", cmd.common.seed, "Random seed");
  cmd.threads_opt = cmd.app->add_option("--threads", cmd.common.threads, "Worker threads (default: ECRISK_THREADS or all cores)");
}

// Config file, then flags; seed and threads land in the config too.
Json resolve(const Command& cmd, bool with_seed = true) {
  Json cfg = Json::object();
  if (!cmd.common.config.empty()) {
    cfg = parse_file(cmd.common.config);
    if (!cfg.is_object()) throw Failure{1, cmd.common.config + ": config must be a JSON object"};
  }
  cmd.flags->apply(cfg);
  if (with_seed && (cmd.seed_opt->count() || !cfg.contains("seed"))) cfg["seed"] = cmd.common.seed;
  if (cmd.threads_opt && cmd.threads_opt->count()) cfg["threads"] = cmd.common.threads;
  // A model given as a path is inlined so the resolved config stands alone.
  if (cfg.contains("model") && cfg["model"].is_string()) cfg["model"] = parse_file(cfg["model"].get<std::string>());
  return cfg;
}

const Json& need_key(const Json& cfg, const char* key, const char* flag) {
  if (!cfg.contains(key) || cfg.at(key).is_null())
    throw Failure{1, std::string("missing '") + key + "' (use " + flag + " or --config)"};
  return cfg.at(key);
}

void load_model(const Json& cfg, Model& model) {
  check(ecr_model_from_json(need_key(cfg, "model", "--model").dump().c_str(), &model.ptr));
}

// Sample from --data, or simulate n rows from the model with the seed.
void load_sample(const Json& cfg, const Model& model, Sample& sample) {
  if (cfg.contains("data")) {
    check(ecr_sample_read_csv(cfg.at("data").get<std::string>().c_str(), &sample.ptr));
    return;
  }
  const auto n = need_key(cfg, "n", "--data or --n").get<long long>();
  if (n < 1) throw Failure{1, "n must be positive"};
  check(ecr_sample_draw(model.ptr, static_cast<size_t>(n), cfg.at("seed").get<std::uint64_t>(), &sample.ptr));
}

void register_schedule(Flags& f) {
  f.number("--a", "schedule.a", "Level exponent: alpha_n = 1 - n^-a");
  f.number("--b", "schedule.b", "Hill fraction exponent: k_n = n^b");
  f.number("--c", "schedule.c", "Bandwidth exponent: h_n = n^-c");
  f.number("--rho", "schedule.rho", "Second-order index (condition checks only)");
  f.number("--gamma-ref", "schedule.gamma_ref", "Reference tail index for condition checks");
}

void register_estimation(Flags& f) {
  f.text("--model", "model", "Model JSON file");
  f.text("--data", "data", "Headerless CSV sample (columns: covariates..., response)");
  f.integer("-n,--n", "n", "Simulated sample size when --data is absent");
  f.numbers("--x", "x", "Covariate point, comma separated");
  f.text("--kernel", "kernel", "gaussian | epanechnikov | uniform");
  register_schedule(f);
}

// Condition report for cfg.schedule, with the top-level N merged in.
Json check_schedule(const Json& cfg) {
  Json schedule = cfg.contains("schedule") ? cfg.at("schedule") : Json::object();
  if (cfg.contains("N") && !schedule.contains("N")) schedule["N"] = cfg.at("N");
  OwnedString out;
  check(ecr_check_conditions(schedule.dump().c_str(), &out.ptr));
  return Json::parse(out.str());
}

Json run_estimate(const Json& cfg) {
  Model model;
  load_model(cfg, model);
  Sample sample;
  load_sample(cfg, model, sample);
  Json options = Json::object();
  for (const char* key : {"x", "schedule", "kernel", "regime", "measures"})
    if (cfg.contains(key)) options[key] = cfg.at(key);
  OwnedString out;
  check(ecr_estimate(model.ptr, sample.ptr, options.dump().c_str(), &out.ptr));
  Json result = Json::parse(out.str());
  result["config"] = cfg;
  return result;
}

std::string estimate_line(const Json& e) {
  std::string line = e.at("kind").get<std::string>() + " at level " + fmt(e.at("level").get<double>(), 10) +
                     " (" + e.at("regime").get<std::string>() + "): " + fmt(e.at("value").get<double>()) +
                     ", 95% CI [" + fmt(e.at("ci_low").get<double>()) + ", " +
                     fmt(e.at("ci_high").get<double>()) + "]";
  for (const auto& w : e.at("warnings")) line += "\n  warning: " + w.get<std::string>();
  return line;
}

void print(const Common& common, const Json& doc, const std::string& human) {
  if (common.json) std::cout << doc.dump(2) << '\n';
  else std::cout << human << '\n';
}

int dispatch(CLI::App& root, std::deque<Command>& cmds) {
  auto used = [&](const std::string& name) -> Command& {
    for (auto& c : cmds)
      if (c.app->get_name() == name) return c;
    throw Failure{1, "unknown command"};
  };

  if (auto& cmd = used("simulate"); cmd.app->parsed()) {
    Json cfg = resolve(cmd);
    Model model;
    load_model(cfg, model);
    Sample sample;
    load_sample(cfg, model, sample);
    size_t rows = 0, cols = 0;
    check(ecr_sample_shape(sample.ptr, &rows, &cols));
    if (cfg.contains("out")) {
      check(ecr_sample_write_csv(sample.ptr, cfg.at("out").get<std::string>().c_str()));
    } else {
      const double* data = nullptr;
      check(ecr_sample_data(sample.ptr, &data));
      for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) std::cout << (j ? "," : "") << fmt(data[i * cols + j], 17);
        std::cout << '\n';
      }
      return 0;
    }
    print(cmd.common, Json{{"config", cfg}, {"rows", rows}, {"cols", cols}},
          "wrote " + std::to_string(rows) + " x " + std::to_string(cols) + " sample to " +
              cfg.at("out").get<std::string>());
    return 0;
  }

  if (auto& cmd = used("estimate-params"); cmd.app->parsed()) {
    const Json result = run_estimate(resolve(cmd));
    const Json& e = result.at("extremal");
    Json doc{{"config", result.at("config")}, {"conditional", result.at("conditional")}, {"extremal", e}};
    print(cmd.common, doc,
          "gamma_hat = " + fmt(e.at("gamma_hat").get<double>()) + ", eta_hat = " +
              fmt(e.at("eta_hat").get<double>()) + " (se " + fmt(e.at("se_eta").get<double>(), 4) +
              "), ell_hat = " + fmt(e.at("ell_hat").get<double>()) + " (se " +
              fmt(e.at("se_ell").get<double>(), 4) + ", " + e.at("regime").get<std::string>() +
              "), k = " + std::to_string(e.at("k").get<long long>()) + ", M(x) = " +
              fmt(result.at("conditional").at("m_x").get<double>()));
    return 0;
  }

  for (const char* name : {"estimate-quantile", "estimate-risk"}) {
    auto& cmd = used(name);
    if (!cmd.app->parsed()) continue;
    Json cfg = resolve(cmd);
    if (std::string(name) == "estimate-quantile") cfg["measures"] = Json::array({"quantile"});
    const Json result = run_estimate(cfg);
    std::string human;
    for (const auto& e : result.at("estimates")) human += (human.empty() ? "" : "\n") + estimate_line(e);
    print(cmd.common, result, human);
    return 0;
  }

  if (auto& cmd = used("montecarlo"); cmd.app->parsed()) {
    Json cfg = resolve(cmd);
    if (cfg.value("extended", false)) {
      Json& sizes = cfg["sizes"];
      if (!sizes.is_array()) sizes = Json::array({1000, 10000, 100000});
      const long long last = sizes.empty() ? 0 : sizes.back().get<long long>();
      for (long long extra : {1000000LL, 10000000LL})
        if (extra > last) sizes.push_back(extra);
    }
    Json run_cfg = cfg;
    for (const char* key : {"out", "csv", "extended"}) run_cfg.erase(key);
    OwnedString report;
    OwnedString csv;
    check(ecr_montecarlo(run_cfg.dump().c_str(), &report.ptr, &csv.ptr));
    Json doc = Json::parse(report.str());
    if (cfg.contains("out")) write_file(cfg.at("out").get<std::string>(), doc.dump(2) + "\n");
    if (cfg.contains("csv")) write_file(cfg.at("csv").get<std::string>(), csv.str());
    std::ostringstream human;
    human << "n          measure      coverage  zeta_hat       zeta           median|rel err|  failed\n";
    for (const auto& size : doc.at("report").at("sizes")) {
      for (const auto& m : size.at("measures")) {
        char line[256];
        std::snprintf(line, sizeof line, "%-10lld %-12s %4lld/%-4lld %-14s %-14s %-16s %zu\n",
                      size.at("n").get<long long>(), m.at("measure").get<std::string>().c_str(),
                      m.at("coverage").get<long long>(),
                      doc.at("config").at("replicates").get<long long>(),
                      m.at("empirical_variance").is_null() ? "-" : fmt(m.at("empirical_variance").get<double>()).c_str(),
                      fmt(m.at("asymptotic_variance").get<double>()).c_str(),
                      m.at("median_abs_relative_error").is_null()
                          ? "-"
                          : fmt(m.at("median_abs_relative_error").get<double>(), 4).c_str(),
                      m.at("failed_replicates").size());
        human << line;
      }
    }
    print(cmd.common, doc, human.str());
    return 0;
  }

  if (auto& cmd = used("real-data"); cmd.app->parsed()) {
    Json cfg = resolve(cmd, false);
    const std::string data = need_key(cfg, "data", "--data").get<std::string>();
    Json options = cfg;
    options.erase("data");
    OwnedString out;
    check(ecr_real_data(data.c_str(), options.dump().c_str(), &out.ptr));
    Json doc = Json::parse(out.str());
    doc["config"] = cfg;
    const Json& r = doc.at("result");
    const Json& e = r.at("extremal");
    std::string human = "learning rows " + std::to_string(r.at("n_learning").get<long long>()) + ", M(x) = " +
                        fmt(r.at("conditional").at("m_x").get<double>()) + ", eta_hat = " +
                        fmt(e.at("eta_hat").get<double>()) + ", ell_hat = " + fmt(e.at("ell_hat").get<double>()) +
                        ", a = " + fmt(r.at("schedule").at("a").get<double>());
    for (const auto& est : r.at("estimates")) {
      human += "\n" + estimate_line(est) + "\n  as percent: " + fmt(100.0 * est.at("value").get<double>(), 7) + "%";
    }
    print(cmd.common, doc, human);
    return 0;
  }

  if (auto& cmd = used("oracle"); cmd.app->parsed()) {
    Json cfg = resolve(cmd, false);
    const std::string what = need_key(cfg, "what", "--what").get<std::string>();
    auto num = [&](const char* key, const char* flag) { return need_key(cfg, key, flag).get<double>(); };
    auto dim = [&] { return static_cast<size_t>(need_key(cfg, "N", "--N").get<long long>()); };
    Json result{{"what", what}};
    if (what == "table1") {
      Json family = need_key(cfg, "family", "--family");
      if (family.is_string()) {
        family = Json{{"family", family}};
        if (cfg.contains("nu")) family["nu"] = cfg.at("nu");
        if (cfg.contains("slash_a")) family["a"] = cfg.at("slash_a");
      }
      double eta = 0.0, ell = 0.0;
      check(ecr_table1(family.dump().c_str(), dim(), num("m_x", "--m-x"), &eta, &ell));
      result["eta"] = eta;
      result["ell"] = ell;
    } else if (what == "quantile" || what == "tvar") {
      double v = 0.0;
      const auto f = what == "quantile" ? ecr_student_conditional_quantile : ecr_student_conditional_tvar;
      check(f(num("nu", "--nu"), dim(), num("m_x", "--m-x"), num("tail", "--tail"), &v));
      result["value"] = v;
    } else if (what == "lp" || what == "hg") {
      double v = 0.0;
      const auto f = what == "lp" ? ecr_student_numeric_lp : ecr_student_numeric_hg;
      check(f(num("nu", "--nu"), dim(), num("m_x", "--m-x"), 1.0 - num("tail", "--tail"), num("p", "--p"), &v));
      result["value"] = v;
    } else if (what == "f_l" || what == "f_h") {
      double v = 0.0;
      check((what == "f_l" ? ecr_f_l : ecr_f_h)(num("gamma", "--gamma"), num("p", "--p"), &v));
      result["value"] = v;
    } else if (what == "tail-index") {
      double v = 0.0;
      check(ecr_conditional_tail_index(num("gamma", "--gamma"), dim(), &v));
      result["value"] = v;
    } else if (what == "variances") {
      double inter = 0.0, high = 0.0;
      double theta = 0.0;
      if (cfg.contains("theta") || !cfg.contains("schedule")) {
        theta = num("theta", "--theta");
      } else {
        const Json conditions = check_schedule(cfg);
        if (!conditions.at("theta").is_number())
          throw Failure{1, "theta is undefined for a + b = 1; pass --theta"};
        theta = conditions.at("theta").get<double>();
      }
      check(ecr_asymptotic_variances(num("gamma", "--gamma"), dim(), theta, &inter, &high));
      result["theta"] = theta;
      result["intermediate"] = inter;
      result["high"] = high;
    } else if (what == "conditions") {
      result["conditions"] = check_schedule(cfg);
    } else {
      throw Failure{1, "unknown oracle '" + what +
                           "' (expected table1, quantile, tvar, lp, hg, f_l, f_h, tail-index, variances, conditions)"};
    }
    result["config"] = cfg;
    std::string human;
    for (auto it = result.begin(); it != result.end(); ++it) {
      if (it.key() == "config" || it.key() == "what") continue;
      if (it.value().is_number()) human += (human.empty() ? "" : ", ") + it.key() + " = " + fmt(it.value().get<double>(), 10);
      else human += (human.empty() ? "" : "\n") + it.value().dump(2);
    }
    print(cmd.common, result, human);
    return 0;
  }

  std::cout << root.help() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App root{"Extreme conditional risk measures for elliptical models"};
  root.require_subcommand(0, 1);
  std::deque<Command> cmds;

  {
    auto& cmd = make_command(cmds, root, "simulate", "Draw a sample from an elliptical model");
    add_seed_threads(cmd);
    cmd.flags->text("--model", "model", "Model JSON file");
    cmd.flags->integer("-n,--n", "n", "Number of rows");
    cmd.flags->text("--out", "out", "Output CSV (default: stdout)");
  }
  {
    auto& cmd = make_command(cmds, root, "estimate-params", "Estimate gamma, eta and ell(x)");
    add_seed_threads(cmd);
    register_estimation(*cmd.flags);
  }
  {
    auto& cmd = make_command(cmds, root, "estimate-quantile", "Estimate the extreme conditional quantile");
    add_seed_threads(cmd);
    register_estimation(*cmd.flags);
    cmd.flags->text("--regime", "regime", "high | intermediate (default from a)");
  }
  {
    auto& cmd = make_command(cmds, root, "estimate-risk", "Estimate quantile, Lp-quantile or HG measures");
    add_seed_threads(cmd);
    register_estimation(*cmd.flags);
    cmd.flags->text("--regime", "regime", "high | intermediate (default from a)");
    cmd.flags->texts("--measures", "measures", "Comma separated: quantile, lp:<p>, hg:<p>");
  }
  {
    auto& cmd = make_command(cmds, root, "montecarlo", "Monte-Carlo coverage and variance experiment");
    add_seed_threads(cmd);
    cmd.flags->text("--model", "model", "Model JSON file (student family)");
    cmd.flags->numbers("--x", "x", "Covariate point");
    cmd.flags->integers("--sizes", "sizes", "Sample sizes, comma separated");
    cmd.flags->integer("--replicates", "replicates", "Replicates per size");
    cmd.flags->texts("--measures", "measures", "Comma separated: quantile, lp:<p>, hg:<p>");
    cmd.flags->text("--kernel", "kernel", "gaussian | epanechnikov | uniform");
    cmd.flags->text("--regime", "regime", "high | intermediate (default from a)");
    cmd.flags->text("--out", "out", "Write the JSON report here");
    cmd.flags->text("--csv", "csv", "Write the tidy per-replicate CSV here");
    register_schedule(*cmd.flags);
    cmd.flags->boolean("--extended", "extended", "Append n = 1e6 and 1e7 (minutes of runtime)");
  }
  {
    auto& cmd = make_command(cmds, root, "real-data", "Conditional risk of a returns series given other series");
    add_seed_threads(cmd);
    cmd.flags->text("--data", "data", "Returns CSV with a header row");
    cmd.flags->texts("--covariates", "covariates", "Covariate column names, comma separated");
    cmd.flags->text("--target", "target", "Target column name");
    cmd.flags->number("--a", "a", "Level exponent (default: (1 - b) * eta_hat)");
    cmd.flags->number("--b", "b", "Hill fraction exponent");
    cmd.flags->number("--c", "c", "Bandwidth exponent");
    cmd.flags->number("--rho", "rho", "Second-order index for condition checks");
    cmd.flags->text("--kernel", "kernel", "gaussian | epanechnikov | uniform");
    cmd.flags->texts("--measures", "measures", "Comma separated: quantile, lp:<p>, hg:<p>");
    cmd.flags->numbers("--x", "x", "Covariate point (default: last row)");
  }
  {
    auto& cmd = make_command(cmds, root, "oracle", "Closed-form and numeric reference values");
    add_seed_threads(cmd);
    cmd.flags->text("--what", "what", "table1 | quantile | tvar | lp | hg | f_l | f_h | tail-index | variances | conditions");
    cmd.flags->text("--family", "family", "Family for table1: gaussian | student | slash");
    cmd.flags->number("--nu", "nu", "Student degrees of freedom");
    cmd.flags->number("--slash-a", "slash_a", "Slash parameter a");
    cmd.flags->integer("--N", "N", "Covariate dimension");
    cmd.flags->number("--m-x", "m_x", "Mahalanobis distance M(x)");
    cmd.flags->number("--tail", "tail", "1 - alpha");
    cmd.flags->number("--p", "p", "Order p");
    cmd.flags->number("--gamma", "gamma", "Tail index");
    cmd.flags->number("--theta", "theta", "Theta = a / (a + b - 1)");
    register_schedule(*cmd.flags);
  }

  try {
    root.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = root.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return dispatch(root, cmds);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed configuration value (" << e.what() << ")\n";
    return 1;
  }
}
