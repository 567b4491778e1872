#include "tailtest/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "tailtest/calibration.hpp"
#include "tailtest/cli/ingest.hpp"
#include "tailtest/cli/serialize.hpp"
#include "tailtest/distributions.hpp"
#include "tailtest/drawdowns.hpp"
#include "tailtest/mixture.hpp"
#include "tailtest/procedures.hpp"
#include "tailtest/studies.hpp"

namespace tailtest::cli {

namespace {

using nlohmann::json;

struct Session {
  const RunConfig& config;
  std::vector<std::string> warnings;
  json cache;
  std::string csv;

  std::unique_ptr<TableStore> tables;
  std::unique_ptr<OutwardLevelStore> levels;

  explicit Session(const RunConfig& c) : config(c) {
    TableStoreOptions options;
    options.replicates = c.table_replicates;
    options.seed = c.table_seed;
    options.threads = c.threads;
    if (c.cache_dir) options.directory = std::filesystem::path(*c.cache_dir);
    tables = std::make_unique<TableStore>(options);
    levels = std::make_unique<OutwardLevelStore>(*tables, calibration_options());
    cache = {{"directory", c.cache_dir ? json(*c.cache_dir) : json()}, {"calibration_hit", false}};
  }

  CalibrationOptions calibration_options() const {
    CalibrationOptions o;
    o.replicates = config.calibration_replicates;
    o.seed = config.calibration_seed;
    o.tolerance = config.tolerance;
    o.threads = config.threads;
    return o;
  }

  MixtureNullOptions mixture_options() const {
    MixtureNullOptions o;
    o.replicates = config.mixture_replicates;
    o.seed = derive_seed(config.seed, 0x4D4958);
    o.threads = config.threads;
    return o;
  }

  bool csv_wanted() const { return effective_format(config) == OutputFormat::csv; }
};

json describe(const IngestResult& in) {
  json skipped = json::array();
  for (const auto& s : in.skipped) skipped.push_back({{"line", s.line}, {"reason", s.reason}});
  return {{"n", in.sample.size()},
          {"rows", in.rows},
          {"header", in.header ? json(*in.header) : json()},
          {"skipped_rows", in.skipped.size()},
          {"skipped", skipped},
          {"below_threshold", in.below_threshold},
          {"max", in.sample.largest()},
          {"min", in.sample.smallest()}};
}

IngestResult load(Session& s) {
  IngestOptions options{s.config.column, s.config.threshold, s.config.transform};
  IngestResult in = ingest_sample(s.config.inputs.front(), options);
  const std::size_t bad = std::count_if(in.skipped.begin(), in.skipped.end(),
                                        [](const SkippedRow& r) { return r.reason != "header"; });
  if (bad > 0) s.warnings.push_back(std::to_string(bad) + " non-numeric rows skipped");
  if (in.below_threshold > 0) {
    s.warnings.push_back(std::to_string(in.below_threshold) + " values below u dropped");
  }
  return in;
}

StatisticSpec block_spec(const RunConfig& c) {
  return StatisticSpec{c.statistic, c.r, StatisticSpec{c.statistic, 1, 0}.uses_trim() ? effective_m(c) : 0};
}

std::filesystem::path calibration_cache_file(const RunConfig& c, std::size_t n, std::size_t m) {
  char name[256];
  std::snprintf(name, sizeof name, "calib_%s_n%zu_r%zu_m%zu_a%.17g_R%zu_s%llu_T%zu_t%llu_tol%.17g_v%u.json",
                std::string(short_name(c.statistic)).c_str(), n, c.r, m, c.level, c.calibration_replicates,
                static_cast<unsigned long long>(c.calibration_seed), c.table_replicates,
                static_cast<unsigned long long>(c.table_seed), c.tolerance, kNullTableFormatVersion);
  return std::filesystem::path(*c.cache_dir) / name;
}

// Outward calibration with an on-disk memo next to the null tables.
json calibrated(Session& s, std::size_t n, std::size_t m) {
  std::optional<std::filesystem::path> file;
  if (s.config.cache_dir) {
    file = calibration_cache_file(s.config, n, m);
    std::ifstream in(*file);
    if (in) {
      try {
        json cached = json::parse(in);
        s.cache["calibration_hit"] = true;
        return cached;
      } catch (const json::exception&) {
        s.warnings.push_back("ignored unreadable calibration cache " + file->string());
      }
    }
  }
  const json result = s.levels->get(s.config.statistic, n, s.config.r, m, s.config.level);
  if (file) {
    std::error_code ec;
    std::filesystem::create_directories(file->parent_path(), ec);
    const auto tmp = file->string() + ".tmp";
    if (std::ofstream out(tmp); out << result.dump()) {
      out.close();
      std::filesystem::rename(tmp, *file, ec);
    }
  }
  return result;
}

json run_calibrate(Session& s) {
  json payload = calibrated(s, s.config.n, effective_m(s.config));
  payload["tolerance"] = s.config.tolerance;
  return payload;
}

json run_test(Session& s) {
  const IngestResult in = load(s);
  const StatisticSpec spec = block_spec(s.config);
  const BlockResult result = block_test(in.sample, spec, s.config.level, *s.tables);
  json payload = {{"sample", describe(in)}, {"result", result}};
  payload["reference"] = spec.kind == StatisticKind::weighted_spacings ? json("F(2r, 2(n-r))") : json("null table");
  return payload;
}

json run_inward(Session& s) {
  const IngestResult in = load(s);
  InwardOptions options;
  options.reference = s.config.inward_reference;
  const SequentialResult result =
      inward_test(in.sample, s.config.statistic, effective_m(s.config), s.config.level, *s.tables, options);
  return {{"sample", describe(in)}, {"inward_reference", to_string(options.reference)}, {"result", result}};
}

json run_outward(Session& s) {
  const IngestResult in = load(s);
  const std::size_t m = effective_m(s.config);
  OutwardOptions options;
  json calibration;
  if (s.config.marginal_level) {
    options.marginal_level = s.config.marginal_level;
  } else {
    if (m >= in.sample.size()) throw Error(ErrorCode::insufficient_sample, "outward test needs m < n");
    calibration = calibrated(s, in.sample.size(), m);
    options.marginal_level = calibration.at("b").get<double>();
  }
  const SequentialResult result =
      outward_test(in.sample, s.config.statistic, s.config.r, m, s.config.level, *s.levels, options);
  return {{"sample", describe(in)}, {"calibration", calibration}, {"result", result}};
}

ProcedureConfig procedure_config(const RunConfig& c) {
  ProcedureConfig p;
  p.procedure = c.procedure;
  p.statistic = c.statistic;
  p.r = c.r;
  p.m = effective_m(c);
  p.level = c.level;
  p.inward_reference = c.inward_reference;
  p.tail_model = c.tail_model;
  return p;
}

json run_sweep(Session& s) {
  const IngestResult in = load(s);
  const std::size_t n = in.sample.size();
  const std::size_t n_max = s.config.n_max.value_or(std::min<std::size_t>(100, n));
  if (n_max > n || n_max <= s.config.n_min) {
    throw Error(ErrorCode::insufficient_sample, "sweep range [" + std::to_string(s.config.n_min) + ", " +
                                                    std::to_string(n_max) + "] does not fit a sample of " +
                                                    std::to_string(n));
  }
  const SweepResult result = tail_sweep(in.sample, s.config.n_min, n_max, procedure_config(s.config), *s.levels);
  if (s.csv_wanted()) s.csv = sweep_csv(result);
  return {{"sample", describe(in)},
          {"procedure", to_string(s.config.procedure)},
          {"statistic", short_name(s.config.statistic)},
          {"tail_model", to_string(s.config.tail_model)},
          {"n_min", s.config.n_min},
          {"n_max", n_max},
          {"sweep", result}};
}

json run_mixture(Session& s) {
  const IngestResult in = load(s);
  const MixtureFit fit = fit_mixture(in.sample);
  MixtureNullStore nulls(s.mixture_options());
  const MixtureLrtResult lrt = mixture_lrt(in.sample, fit, nulls);
  if (s.csv_wanted()) s.csv = responsibilities_csv(in.sample, fit);
  return {{"sample", describe(in)},
          {"fit",
           {{"params", fit.params},
            {"loglik", fit.loglik},
            {"iterations", fit.iterations},
            {"converged", fit.converged},
            {"degenerate", fit.degenerate},
            {"sigma_floor", fit.sigma_floor}}},
          {"lrt",
           {{"statistic", lrt.statistic},
            {"p_value", lrt.p_value},
            {"exponential_loglik", lrt.exponential_loglik},
            {"replicates", lrt.replicates},
            {"rejected", lrt.p_value <= s.config.level}}},
          {"k_hat", fit.k_hat},
          {"weight_count", weight_count(fit)},
          {"responsibilities", responsibility_table(in.sample, fit)}};
}

json run_drawdowns(Session& s) {
  std::vector<std::filesystem::path> paths(s.config.inputs.begin(), s.config.inputs.end());
  const PriceIngest prices = ingest_prices(paths, s.config.delta);
  if (!prices.skipped.empty()) s.warnings.push_back(std::to_string(prices.skipped.size()) + " rows skipped");
  DrawdownOptions options;
  options.epsilon = s.config.epsilon;
  options.include_censored = s.config.include_censored;
  options.include_drawups = s.config.include_drawups;
  const DrawdownAnalysis analysis = analyze_drawdowns(prices.days, options);
  if (s.csv_wanted()) s.csv = episodes_csv(analysis.episodes);

  json days = json::array();
  for (const auto& d : analysis.days) {
    days.push_back({{"day", d.day_id},
                    {"returns", d.returns},
                    {"sigma", d.sigma},
                    {"previous_sigma", d.previous_sigma},
                    {"episodes", d.extraction.episodes.size()}});
  }
  json payload = {{"rows", prices.rows},
                  {"skipped_rows", prices.skipped.size()},
                  {"duplicate_timestamps", prices.duplicate_timestamps},
                  {"days", days},
                  {"episodes", analysis.episodes},
                  {"dropped_no_previous_day", analysis.dropped_no_previous_day},
                  {"dropped_censored", analysis.dropped_censored},
                  {"skipped_days", analysis.skipped_days},
                  {"sweep", nullptr}};

  std::vector<double> sizes;
  for (const auto& e : analysis.episodes) {
    if (e.normalized_size > 0.0) sizes.push_back(e.normalized_size);
  }
  const std::size_t n = sizes.size();
  const std::size_t n_max = s.config.n_max.value_or(std::min<std::size_t>(100, n));
  if (n_max > n || n_max <= s.config.n_min) {
    s.warnings.push_back("too few normalized episodes (" + std::to_string(n) + ") for the tail sweep");
    return payload;
  }
  ProcedureConfig procedure;
  procedure.procedure = ProcedureKind::inward;
  procedure.statistic = StatisticKind::max_robust_sum;
  procedure.m = effective_m(s.config);
  procedure.level = s.config.level;
  procedure.inward_reference = s.config.inward_reference;
  procedure.tail_model = TailModel::pareto;
  const SweepResult sweep = tail_sweep(OrderedSample(std::move(sizes)), s.config.n_min, n_max, procedure, *s.levels);
  payload["sweep"] = {{"statistic", "MRS"}, {"m", procedure.m}, {"n_min", s.config.n_min}, {"n_max", n_max},
                      {"tail_model", "pareto"}, {"result", sweep}};
  return payload;
}

json run_simulate(Session& s) {
  const RunConfig& c = s.config;
  MixtureNullStore nulls(s.mixture_options());
  StudyContext context{*s.tables, *s.levels, nulls, c.threads};
  StudyReport report;
  switch (c.study) {
    case Study::sequential:
      report = sequential_comparison_study(sequential_preset(c.study_n), c.replications, c.level, c.seed, context);
      break;
    case Study::power: {
      const PowerPreset preset = power_preset(*parse_power_case(c.power_case));
      report = power_study(preset.methods, preset.grid, c.replications, c.level, c.seed, context);
      break;
    }
    case Study::mask_swamp: {
      ScenarioSpec scenario;
      scenario.kind = *parse_scenario_kind(c.scenario);
      scenario.n = c.study_n;
      scenario.k = c.scenario_k;
      scenario.mu = c.scenario_mu;
      scenario.beta = c.scenario_beta;
      const std::vector<StatisticKind> kinds{StatisticKind::sum_sum,        StatisticKind::sum_robust_sum,
                                             StatisticKind::max_sum,        StatisticKind::max_robust_sum,
                                             StatisticKind::dixon,          StatisticKind::weighted_spacings};
      report = mask_swamp_study(kinds, scenario, c.max_block, c.replications, c.level, c.seed, context);
      break;
    }
    case Study::robustness:
      report = robustness_study(c.kappas, c.replications, c.level, c.seed, context);
      break;
  }
  if (s.csv_wanted()) s.csv = study_csv(report);
  return report;
}

json run_ccdf(Session& s) {
  const IngestResult in = load(s);
  const auto points = empirical_ccdf(in.sample);
  if (s.csv_wanted()) s.csv = ccdf_csv(points);
  return {{"sample", describe(in)}, {"points", points}};
}

json run_layers(Session& s) {
  RunConfig c = s.config;
  if (!c.threshold) c.threshold = c.breakpoints.front();
  IngestOptions options{c.column, c.threshold, Transform::none};
  IngestResult in = ingest_sample(c.inputs.front(), options);
  if (in.below_threshold > 0) {
    s.warnings.push_back(std::to_string(in.below_threshold) + " values below the first breakpoint dropped");
  }
  const LayeredParetoFit fit = fit_layered_pareto(in.sample, c.breakpoints);
  const ParetoParams single = mle_pareto(in.sample, c.breakpoints.front());
  const double single_loglik = pareto_loglik(in.sample, single);

  json layers = json::array();
  for (std::size_t l = 0; l < fit.alphas.size(); ++l) {
    layers.push_back({{"lower", fit.breakpoints[l]},
                      {"upper", l + 1 < fit.breakpoints.size() ? json(fit.breakpoints[l + 1]) : json()},
                      {"alpha", fit.alphas[l]},
                      {"standard_error", mle_standard_error(fit.alphas[l], fit.counts[l])},
                      {"count", fit.counts[l]}});
  }
  json lrt = nullptr;
  if (fit.alphas.size() > 1) {
    const std::size_t df = fit.alphas.size() - 1;
    lrt = {{"statistic", 2.0 * std::max(0.0, fit.loglik - single_loglik)},
           {"df", df},
           {"p_value", likelihood_ratio_test(single_loglik, fit.loglik, df)}};
  }
  return {{"sample", describe(in)},
          {"layers", layers},
          {"loglik", fit.loglik},
          {"single",
           {{"alpha", single.alpha},
            {"standard_error", mle_standard_error(single.alpha, in.sample.size())},
            {"loglik", single_loglik}}},
          {"lrt", lrt}};
}

json error_json(const std::exception& e) {
  json j = {{"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["code"] = to_string(err->code());
    if (const auto* cal = dynamic_cast<const CalibrationError*>(err)) {
      j["best_b"] = cal->best_b();
      j["best_achieved_a"] = cal->best_achieved();
    }
    if (const auto* num = dynamic_cast<const NumericError*>(err)) j["trace"] = num->trace();
  } else {
    j["code"] = "internal";
  }
  return j;
}

json envelope_base(const RunConfig& config) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"schema_version", kSchemaVersion},
          {"command", to_string(config.command)},
          {"config", to_json(config)},
          {"seed", config.seed}};
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::usage:
    case ErrorCode::spec: return 2;
    case ErrorCode::input:
    case ErrorCode::parameter_domain:
    case ErrorCode::degenerate_sample:
    case ErrorCode::degenerate_denominator:
    case ErrorCode::insufficient_sample:
    case ErrorCode::layering: return 3;
    case ErrorCode::numeric:
    case ErrorCode::calibration_tolerance:
    case ErrorCode::optimization_failure:
    case ErrorCode::resolution: return 4;
  }
  return 4;
}

CommandOutput run_command(const RunConfig& config) {
  if (config.command == Command::rerun) {
    try {
      std::ifstream in(config.inputs.at(0));
      if (!in) throw Error(ErrorCode::input, "cannot open " + config.inputs.at(0));
      const json report = json::parse(in);
      RunConfig replay = config_from_json(report.at("config"));
      if (replay.command == Command::rerun) throw Error(ErrorCode::usage, "a rerun report cannot be replayed");
      replay.cache_dir = config.cache_dir;
      replay.threads = config.threads;
      replay.output = config.output;
      replay.quiet = config.quiet;
      if (config.format) replay.format = config.format;
      CommandOutput out = run_command(replay);
      out.envelope["warnings"].push_back("replayed from " + config.inputs.at(0));
      return out;
    } catch (const json::exception& e) {
      CommandOutput out{envelope_base(config), "", 3};
      out.envelope["error"] = {{"code", "input"}, {"message", std::string("not a report: ") + e.what()}};
      out.envelope["payload"] = nullptr;
      return out;
    } catch (const Error& e) {
      CommandOutput out{envelope_base(config), "", exit_code_for(e.code())};
      out.envelope["error"] = error_json(e);
      out.envelope["payload"] = nullptr;
      return out;
    }
  }

  const auto start = std::chrono::steady_clock::now();
  Session session(config);
  const bool randomized = config.command == Command::simulate || config.command == Command::mixture;
  if (randomized && config.seed_from_entropy) session.warnings.push_back("no --seed given; seed drawn from entropy");
  if (config.table_replicates < 1000) {
    session.warnings.push_back("null tables with fewer than 1000 replicates resolve p-values coarsely");
  }

  CommandOutput out;
  out.envelope = envelope_base(config);
  json payload;
  try {
    switch (config.command) {
      case Command::calibrate: payload = run_calibrate(session); break;
      case Command::test: payload = run_test(session); break;
      case Command::inward: payload = run_inward(session); break;
      case Command::outward: payload = run_outward(session); break;
      case Command::sweep: payload = run_sweep(session); break;
      case Command::mixture: payload = run_mixture(session); break;
      case Command::drawdowns: payload = run_drawdowns(session); break;
      case Command::simulate: payload = run_simulate(session); break;
      case Command::ccdf: payload = run_ccdf(session); break;
      case Command::layers: payload = run_layers(session); break;
      case Command::rerun: break;
    }
    out.csv = std::move(session.csv);
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e.code());
    out.envelope["error"] = error_json(e);
    payload = nullptr;
  } catch (const std::exception& e) {
    out.exit_code = 4;
    out.envelope["error"] = error_json(e);
    payload = nullptr;
  }

  const auto counters = session.tables->counters();
  session.cache["memory_hits"] = counters.memory_hits;
  session.cache["disk_hits"] = counters.disk_hits;
  session.cache["tables_built"] = counters.built;
  out.envelope["timing"] = {
      {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  out.envelope["warnings"] = session.warnings;
  out.envelope["cache"] = session.cache;
  out.envelope["payload"] = std::move(payload);
  return out;
}

std::string render(const CommandOutput& output) {
  if (output.exit_code == 0 && !output.csv.empty()) return output.csv;
  return output.envelope.dump(2) + "\n";
}

}  // namespace tailtest::cli
