#include "tailtest/cli/serialize.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace tailtest {

namespace {

nlohmann::json maybe(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

void to_json(nlohmann::json& j, const StatisticSpec& spec) {
  j = {{"kind", short_name(spec.kind)}, {"label", spec.label()}};
  j[spec.is_max_type() ? "j" : "r"] = spec.rank;
  if (spec.uses_trim()) j["m"] = spec.trim;
}

void to_json(nlohmann::json& j, const MarginalLevelResult& r) {
  j = {{"statistic", short_name(r.kind)},
       {"n", r.n},
       {"r", r.r},
       {"m", r.m},
       {"target_a", r.target_a},
       {"b", r.b},
       {"achieved_a", r.achieved_a},
       {"bounds", {std::pow(r.target_a, static_cast<double>(r.r)), r.target_a}},
       {"replicates", r.replicates},
       {"seed", r.seed}};
  auto& trace = j["trace"] = nlohmann::json::array();
  for (const auto& step : r.trace) trace.push_back({{"b", step.b}, {"achieved", step.achieved}});
}

void to_json(nlohmann::json& j, const BlockResult& r) {
  j = {{"spec", r.spec}, {"statistic", r.statistic}, {"p_value", r.p_value}, {"level", r.level},
       {"rejected", r.rejected}};
}

void to_json(nlohmann::json& j, const SequentialStep& s) {
  j = {{"rank", s.rank},           {"sample_size", s.sample_size}, {"table_n", s.table_n},
       {"table_spec", s.table_spec}, {"statistic", s.statistic},     {"p_value", s.p_value},
       {"rejected", s.rejected}};
}

void to_json(nlohmann::json& j, const SequentialResult& r) {
  j = {{"direction", to_string(r.direction)},
       {"k_hat", r.k_hat},
       {"marginal_level", r.marginal_level},
       {"overall_level", r.overall_level},
       {"steps", r.steps}};
}

void to_json(nlohmann::json& j, const SweepPoint& p) {
  j = {{"n", p.n_tail},   {"threshold", p.threshold},       {"m", p.m_used},
       {"k_hat", p.k_hat}, {"p_first_step", p.p_first_step}, {"rejected", p.rejected}};
}

void to_json(nlohmann::json& j, const SweepResult& r) {
  j = {{"run_rule_c", r.run_rule_c}, {"longest_run", r.longest_run}, {"verdict", r.verdict}, {"trail", r.points}};
}

void to_json(nlohmann::json& j, const MixtureParams& p) {
  j = {{"pi", p.pi}, {"alpha", p.alpha}, {"mu", p.mu}, {"sigma", p.sigma}};
}

void to_json(nlohmann::json& j, const Episode& e) {
  j = {{"day", e.day_id},
       {"kind", to_string(e.kind)},
       {"i0", e.i0},
       {"i1", e.i1},
       {"i2", e.i2},
       {"size", e.size},
       {"normalized_size", std::isnan(e.normalized_size) ? nlohmann::json() : nlohmann::json(e.normalized_size)},
       {"censored", e.censored}};
}

void to_json(nlohmann::json& j, const Quartiles& q) { j = {q.q1, q.median, q.q3}; }

void to_json(nlohmann::json& j, const MethodSummary& s) {
  j = {{"method", s.method},
       {"rejections", s.rejections},
       {"rejection_rate", s.rejection_rate},
       {"k_hat_quartiles", s.k_hat ? nlohmann::json(*s.k_hat) : nlohmann::json()},
       {"precision", maybe(s.precision)},
       {"recall", maybe(s.recall)}};
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  j = {{"kind", to_string(s.kind)}, {"label", s.label()}, {"n", s.n}, {"k", s.planted()}};
}

void to_json(nlohmann::json& j, const GridPoint& p) {
  j = {{"label", p.label}, {"parameter", p.parameter}, {"scenario", p.scenario}, {"methods", p.methods}};
}

void to_json(nlohmann::json& j, const StudyReport& r) {
  j = {{"study", r.study},
       {"replications", r.replications},
       {"seed", r.seed},
       {"level", r.level},
       {"points", r.points}};
}

void to_json(nlohmann::json& j, const CcdfPoint& p) { j = {{"value", p.value}, {"probability", p.probability}}; }

}  // namespace tailtest

namespace tailtest::cli {

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, end) : std::string();
}

nlohmann::json responsibility_table(const OrderedSample& sample, const MixtureFit& fit) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    rows.push_back({{"rank", i + 1},
                    {"value", sample[i]},
                    {"responsibility", fit.responsibilities[i]},
                    {"outlier", fit.responsibilities[i] > 0.5}});
  }
  return rows;
}

std::string ccdf_csv(std::span<const CcdfPoint> points) {
  std::ostringstream out;
  out << "value,probability\n";
  for (const auto& p : points) out << format_double(p.value) << ',' << format_double(p.probability) << '\n';
  return out.str();
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "n,threshold,m,k_hat,p_first_step,rejected\n";
  for (const auto& p : result.points) {
    out << p.n_tail << ',' << format_double(p.threshold) << ',' << p.m_used << ',' << p.k_hat << ','
        << format_double(p.p_first_step) << ',' << (p.rejected ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string responsibilities_csv(const OrderedSample& sample, const MixtureFit& fit) {
  std::ostringstream out;
  out << "rank,value,responsibility,outlier\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << i + 1 << ',' << format_double(sample[i]) << ',' << format_double(fit.responsibilities[i]) << ','
        << (fit.responsibilities[i] > 0.5 ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string episodes_csv(std::span<const Episode> episodes) {
  std::ostringstream out;
  out << "day,kind,i0,i1,i2,size,normalized_size,censored\n";
  for (const auto& e : episodes) {
    out << e.day_id << ',' << to_string(e.kind) << ',' << e.i0 << ',' << e.i1 << ',' << e.i2 << ','
        << format_double(e.size) << ',' << format_double(e.normalized_size) << ',' << (e.censored ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string study_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "study,point,parameter,scenario,method,replications,rejections,rejection_rate,k_hat_q1,k_hat_median,"
         "k_hat_q3,precision,recall\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& p : report.points) {
    for (const auto& m : p.methods) {
      out << report.study << ',' << '"' << p.label << '"' << ',' << format_double(p.parameter) << ',' << '"'
          << p.scenario.label() << '"' << ',' << '"' << m.method << '"' << ',' << report.replications << ','
          << m.rejections << ',' << format_double(m.rejection_rate) << ',';
      if (m.k_hat) {
        out << format_double(m.k_hat->q1) << ',' << format_double(m.k_hat->median) << ','
            << format_double(m.k_hat->q3);
      } else {
        out << ",,";
      }
      out << ',' << opt(m.precision) << ',' << opt(m.recall) << '\n';
    }
  }
  return out.str();
}

}  // namespace tailtest::cli
