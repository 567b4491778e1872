#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "tailtest/calibration.hpp"
#include "tailtest/distributions.hpp"
#include "tailtest/drawdowns.hpp"
#include "tailtest/mixture.hpp"
#include "tailtest/procedures.hpp"
#include "tailtest/studies.hpp"

// JSON forms of library results, found by nlohmann::json through ADL.
namespace tailtest {

void to_json(nlohmann::json& j, const StatisticSpec& spec);
void to_json(nlohmann::json& j, const MarginalLevelResult& result);
void to_json(nlohmann::json& j, const BlockResult& result);
void to_json(nlohmann::json& j, const SequentialStep& step);
void to_json(nlohmann::json& j, const SequentialResult& result);
void to_json(nlohmann::json& j, const SweepPoint& point);
void to_json(nlohmann::json& j, const SweepResult& result);
void to_json(nlohmann::json& j, const MixtureParams& params);
void to_json(nlohmann::json& j, const Episode& episode);
void to_json(nlohmann::json& j, const Quartiles& q);
void to_json(nlohmann::json& j, const MethodSummary& summary);
void to_json(nlohmann::json& j, const ScenarioSpec& scenario);
void to_json(nlohmann::json& j, const GridPoint& point);
void to_json(nlohmann::json& j, const StudyReport& report);
void to_json(nlohmann::json& j, const CcdfPoint& point);

}  // namespace tailtest

namespace tailtest::cli {

/// Responsibility table: one row per point in descending order.
nlohmann::json responsibility_table(const OrderedSample& sample, const MixtureFit& fit);

// CSV renderers; every table starts with a header row.
std::string ccdf_csv(std::span<const CcdfPoint> points);
std::string sweep_csv(const SweepResult& result);
std::string responsibilities_csv(const OrderedSample& sample, const MixtureFit& fit);
std::string episodes_csv(std::span<const Episode> episodes);
std::string study_csv(const StudyReport& report);

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

}  // namespace tailtest::cli
