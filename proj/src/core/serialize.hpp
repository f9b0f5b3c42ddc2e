#pragma once

#include <json.hpp>
#include <string>

#include "core/elliptical.hpp"
#include "core/experiments.hpp"
#include "core/extremal.hpp"
#include "core/io.hpp"
#include "core/quantile.hpp"

namespace ecrisk {

using Json = nlohmann::ordered_json;

/// {"family": "student", "nu": 2, "mu": [...], "sigma": [[...]]}.
EllipticalModel model_from_json(const Json& doc);
Json model_to_json(const EllipticalModel& model);
Family family_from_json(const Json& doc);

/// Parses text, mapping syntax errors to IoError.
Json parse_json_text(const std::string& text, const std::string& source);

Json to_json(const ConditionalMoments& cond);
Json to_json(const ExtremalEstimate& est);
Json to_json(const RiskEstimate& est);
Json to_json(const ConditionReport& report);
Json to_json(const SequenceSchedule& schedule);
Json to_json(const ExperimentReport& report);
Json to_json(const RealDataResult& result);

/// Schedule keys a, b, c, rho, gamma_ref; missing keys keep `defaults`.
SequenceSchedule schedule_from_json(const Json& doc, SequenceSchedule defaults);
std::vector<MeasureKind> measures_from_json(const Json& doc);

/// Montecarlo config: model, x, schedule, sizes, replicates, measures, seed,
/// kernel, regime, threads. Returns the plan and the resolved config.
std::pair<ExperimentPlan, Json> plan_from_json(const Json& config);

/// Tidy CSV: n, measure, replicate, estimate, oracle, ratio,
/// standardized_error, ci_low, ci_high, hit.
std::string records_to_csv(const ExperimentReport& report);

}  // namespace ecrisk
