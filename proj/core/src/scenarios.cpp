#include <algorithm>
#include <cstdio>
#include <functional>
#include <utility>

#include "tailtest/distributions.hpp"
#include "tailtest/error.hpp"
#include "tailtest/studies.hpp"

namespace tailtest {

namespace {

constexpr std::pair<ScenarioKind, std::string_view> kScenarioNames[] = {
    {ScenarioKind::null0, "null0"},
    {ScenarioKind::single, "single"},
    {ScenarioKind::clustered, "clustered"},
    {ScenarioKind::dispersed_fixed_shift, "dispersed_fixed_shift"},
    {ScenarioKind::dispersed_max_shift, "dispersed_max_shift"},
    {ScenarioKind::weibull_null, "weibull_null"},
    {ScenarioKind::weibull_max_shift, "weibull_max_shift"},
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) noexcept {
  for (const auto& [k, name] : kScenarioNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
  for (const auto& [k, name] : kScenarioNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::size_t ScenarioSpec::planted() const noexcept {
  switch (kind) {
    case ScenarioKind::null0:
    case ScenarioKind::weibull_null: return 0;
    case ScenarioKind::single: return 1;
    default: return k;
  }
}

std::string ScenarioSpec::label() const {
  std::string out(to_string(kind));
  out += " n=" + std::to_string(n);
  if (planted() > 0) out += " k=" + std::to_string(planted());
  switch (kind) {
    case ScenarioKind::single:
    case ScenarioKind::clustered: out += " mu=" + format_number(mu) + " sigma=" + format_number(sigma); break;
    case ScenarioKind::dispersed_fixed_shift: out += " shift=" + format_number(shift) + " beta=" + format_number(beta); break;
    case ScenarioKind::dispersed_max_shift: out += " beta=" + format_number(beta); break;
    case ScenarioKind::weibull_null: out += " kappa=" + format_number(kappa); break;
    case ScenarioKind::weibull_max_shift: out += " kappa=" + format_number(kappa) + " beta=" + format_number(beta); break;
    case ScenarioKind::null0: break;
  }
  return out;
}

void validate(const ScenarioSpec& spec) {
  if (spec.n < 2) throw Error(ErrorCode::parameter_domain, "scenario needs n >= 2");
  if (spec.planted() >= spec.n) throw Error(ErrorCode::parameter_domain, "scenario needs k < n");
  const bool multi = spec.kind == ScenarioKind::clustered || spec.kind == ScenarioKind::dispersed_fixed_shift ||
                     spec.kind == ScenarioKind::dispersed_max_shift || spec.kind == ScenarioKind::weibull_max_shift;
  if (multi && spec.k < 1) throw Error(ErrorCode::parameter_domain, "scenario with outliers needs k >= 1");
  if ((spec.kind == ScenarioKind::single || spec.kind == ScenarioKind::clustered)) {
    validate(FamilyParams{NormalParams{spec.mu, spec.sigma}});
  }
  if (spec.kind == ScenarioKind::dispersed_fixed_shift || spec.kind == ScenarioKind::dispersed_max_shift ||
      spec.kind == ScenarioKind::weibull_max_shift) {
    if (!(spec.beta > 0.0)) throw Error(ErrorCode::parameter_domain, "scenario shift mean beta must be > 0");
  }
  if (spec.kind == ScenarioKind::weibull_null || spec.kind == ScenarioKind::weibull_max_shift) {
    validate(FamilyParams{WeibullParams{spec.kappa, 1.0}});
  }
}

Scenario generate_scenario(const ScenarioSpec& spec, RngStream& rng) {
  validate(spec);
  const std::size_t k = spec.planted();
  const std::size_t inliers = spec.n - k;
  const bool weibull = spec.kind == ScenarioKind::weibull_null || spec.kind == ScenarioKind::weibull_max_shift;
  const FamilyParams base = weibull ? FamilyParams{WeibullParams{spec.kappa, 1.0}} : FamilyParams{ExponentialParams{}};

  // (value, planted) pairs; inliers first, then outliers.
  std::vector<std::pair<double, bool>> points;
  points.reserve(spec.n);
  double inlier_max = 0.0;
  for (std::size_t i = 0; i < inliers; ++i) {
    const double v = draw(base, rng);
    inlier_max = std::max(inlier_max, v);
    points.emplace_back(v, false);
  }
  const FamilyParams shift_law = ExponentialParams{1.0 / spec.beta, 0.0};
  for (std::size_t i = 0; i < k; ++i) {
    double v = 0.0;
    switch (spec.kind) {
      case ScenarioKind::single:
      case ScenarioKind::clustered: v = draw(FamilyParams{NormalParams{spec.mu, spec.sigma}}, rng); break;
      case ScenarioKind::dispersed_fixed_shift: v = spec.shift + draw(shift_law, rng); break;
      case ScenarioKind::dispersed_max_shift:
      case ScenarioKind::weibull_max_shift: v = inlier_max + draw(shift_law, rng); break;
      default: break;
    }
    points.emplace_back(v, true);
  }
  // Descending by value; among equal values inliers come first so planted
  // positions are never flattered by ties.
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  Scenario out{OrderedSample::from_descending([&] {
                 std::vector<double> v;
                 v.reserve(points.size());
                 for (const auto& p : points) v.push_back(p.first);
                 return v;
               }()),
               {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].second) out.planted.push_back(i);
  }
  return out;
}

}  // namespace tailtest
