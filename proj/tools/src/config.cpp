#include "tailtest/cli/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "tailtest/calibration.hpp"
#include "tailtest/error.hpp"
#include "tailtest/studies.hpp"

namespace tailtest::cli {

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::calibrate, "calibrate"}, {Command::test, "test"},         {Command::inward, "inward"},
    {Command::outward, "outward"},     {Command::sweep, "sweep"},       {Command::mixture, "mixture"},
    {Command::drawdowns, "drawdowns"}, {Command::simulate, "simulate"}, {Command::ccdf, "ccdf"},
    {Command::layers, "layers"},       {Command::rerun, "rerun"},
};

constexpr std::pair<Study, std::string_view> kStudies[] = {
    {Study::sequential, "sequential"},
    {Study::power, "power"},
    {Study::mask_swamp, "mask-swamp"},
    {Study::robustness, "robustness"},
};

bool needs_input(Command c) { return c != Command::calibrate && c != Command::simulate; }

std::uint64_t entropy_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

// Raw text of enum-valued flags, converted after parsing so that every bad
// value is reported together.
struct RawEnums {
  std::string statistic;
  std::string inward_reference;
  std::string procedure;
  std::string tail_model;
  std::string transform;
  std::string format;
  std::string study;
};

}  // namespace

std::string_view to_string(Command command) noexcept {
  for (const auto& [c, name] : kCommands) {
    if (c == command) return name;
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view text) {
  for (const auto& [c, name] : kCommands) {
    if (name == text) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Transform transform) noexcept {
  switch (transform) {
    case Transform::none: return "none";
    case Transform::log: return "log";
    case Transform::excess: return "excess";
  }
  return "?";
}

std::optional<Transform> parse_transform(std::string_view text) {
  for (auto t : {Transform::none, Transform::log, Transform::excess}) {
    if (text == to_string(t)) return t;
  }
  return std::nullopt;
}

std::string_view to_string(OutputFormat format) noexcept { return format == OutputFormat::csv ? "csv" : "json"; }

std::string_view to_string(Study study) noexcept {
  for (const auto& [s, name] : kStudies) {
    if (s == study) return name;
  }
  return "?";
}

std::optional<Study> parse_study(std::string_view text) {
  for (const auto& [s, name] : kStudies) {
    if (name == text) return s;
  }
  return std::nullopt;
}

std::size_t effective_m(const RunConfig& config) {
  if (config.m) return *config.m;
  switch (config.command) {
    case Command::inward:
    case Command::sweep:
    case Command::drawdowns: return 10;
    default: return config.r;
  }
}

bool supports_csv(Command command) noexcept {
  switch (command) {
    case Command::ccdf:
    case Command::sweep:
    case Command::mixture:
    case Command::drawdowns:
    case Command::simulate: return true;
    default: return false;
  }
}

OutputFormat effective_format(const RunConfig& config) {
  if (config.format) return *config.format;
  return config.command == Command::ccdf ? OutputFormat::csv : OutputFormat::json;
}

ParseResult parse_config(const std::vector<std::string>& args, const Environment& environment) {
  RunConfig config;
  RawEnums raw{"", "full_sample_rank", "inward", "pareto", "none", "", "sequential"};
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> table_seed;
  std::optional<std::uint64_t> calibration_seed;

  CLI::App app{"Outlier tests for Exponential and Pareto tails", std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed; drawn from entropy and reported when absent");
    sub->add_option("--threads", config.threads, "worker cap, 0 = all cores; results do not depend on it");
    sub->add_option("--cache-dir", config.cache_dir, "null-table cache directory (default $TAILTEST_CACHE_DIR)");
    sub->add_option("--format", raw.format, "json or csv");
    sub->add_option("-o,--output", config.output, "write the report here instead of stdout");
    sub->add_flag("-q,--quiet", config.quiet, "suppress notes on stderr");
    sub->add_option("--table-replicates", config.table_replicates, "null-table size")->capture_default_str();
    sub->add_option("--table-seed", table_seed, "null-table seed (default fixed)");
  };
  auto add_input = [&](CLI::App* sub, bool many = false) {
    auto* opt = sub->add_option("input", config.inputs, "input file")->required();
    if (!many) opt->expected(1);
  };
  auto add_ingest = [&](CLI::App* sub) {
    add_input(sub);
    sub->add_option("--column", config.column, "1-based column index or header name");
    sub->add_option("--u", config.threshold, "keep values >= u");
    sub->add_option("--transform", raw.transform, "none, log (log(x/u)) or excess (x-u)");
  };
  auto add_statistic = [&](CLI::App* sub, const std::string& default_stat) {
    sub->add_option("--stat", raw.statistic, "ss, srs, ms, mrs, d or dk (default " + default_stat + ")");
    sub->add_option("--r", config.r, "rank r (block size, outward depth)")->capture_default_str();
    sub->add_option("--m", config.m, "robustness trim m");
    sub->add_option("--level", config.level, "test level a")->capture_default_str();
  };
  auto add_calibration = [&](CLI::App* sub) {
    sub->add_option("--calibration-replicates", config.calibration_replicates)->capture_default_str();
    sub->add_option("--calibration-seed", calibration_seed, "calibration seed (default fixed)");
    sub->add_option("--tolerance", config.tolerance, "allowed |a(b) - a|")->capture_default_str();
  };
  auto add_inward_reference = [&](CLI::App* sub) {
    sub->add_option("--inward-reference", raw.inward_reference,
                    "full_sample_rank, reduced_fixed_denominator or reduced_fixed_trim")
        ->capture_default_str();
  };
  auto add_sweep = [&](CLI::App* sub) {
    sub->add_option("--nmin", config.n_min, "smallest tail size")->capture_default_str();
    sub->add_option("--nmax", config.n_max, "largest tail size (default min(100, n))");
  };

  auto* calibrate = app.add_subcommand("calibrate", "outward marginal level b for an overall level a");
  add_common(calibrate);
  add_statistic(calibrate, "ms");
  calibrate->add_option("--n", config.n, "sample size")->required();
  calibrate->add_option("--a", config.level, "overall level a (alias of --level)");
  add_calibration(calibrate);

  auto* test = app.add_subcommand("test", "block test of the top r points");
  add_common(test);
  add_ingest(test);
  add_statistic(test, "ss");

  auto* inward = app.add_subcommand("inward", "inward sequential test");
  add_common(inward);
  add_ingest(inward);
  add_statistic(inward, "mrs");
  add_inward_reference(inward);

  auto* outward = app.add_subcommand("outward", "outward sequential test with calibrated b");
  add_common(outward);
  add_ingest(outward);
  add_statistic(outward, "ms");
  add_calibration(outward);
  outward->add_option("--b", config.marginal_level, "use this marginal level instead of calibrating");

  auto* sweep = app.add_subcommand("sweep", "procedure over shrinking top-n subsamples with the run rule");
  add_common(sweep);
  add_ingest(sweep);
  add_statistic(sweep, "mrs");
  add_calibration(sweep);
  add_inward_reference(sweep);
  add_sweep(sweep);
  sweep->add_option("--procedure", raw.procedure, "block, inward or outward")->capture_default_str();
  sweep->add_option("--tail-model", raw.tail_model, "none, exponential or pareto")->capture_default_str();

  auto* mixture = app.add_subcommand("mixture", "Exponential + Gaussian mixture fit, LRT and classification");
  add_common(mixture);
  add_ingest(mixture);
  mixture->add_option("--level", config.level)->capture_default_str();
  mixture->add_option("--mixture-replicates", config.mixture_replicates, "LRT null size")->capture_default_str();

  auto* drawdowns = app.add_subcommand("drawdowns", "epsilon-drawdowns from prices, normalized and swept");
  add_common(drawdowns);
  add_input(drawdowns, true);
  drawdowns->add_option("--epsilon", config.epsilon)->capture_default_str();
  drawdowns->add_option("--delta", config.delta, "sampling interval in seconds")->capture_default_str();
  drawdowns->add_flag("--include-drawups", config.include_drawups);
  drawdowns->add_flag("--include-censored", config.include_censored);
  drawdowns->add_option("--m", config.m, "inward MRS trim (default 10)");
  drawdowns->add_option("--level", config.level)->capture_default_str();
  add_inward_reference(drawdowns);
  add_sweep(drawdowns);

  auto* simulate = app.add_subcommand("simulate", "simulation studies");
  add_common(simulate);
  simulate->add_option("--study", raw.study, "sequential, power, mask-swamp or robustness")->capture_default_str();
  simulate->add_option("--n", config.study_n, "sequential preset: 50, 30 or 15; mask-swamp sample size");
  simulate->add_option("--case", config.power_case, "power case: single, dispersed or clustered")
      ->capture_default_str();
  simulate->add_option("--kappa", config.kappas, "robustness Weibull shapes")->delimiter(',');
  simulate->add_option("--scenario", config.scenario, "mask-swamp scenario kind")->capture_default_str();
  simulate->add_option("--k", config.scenario_k, "mask-swamp planted count")->capture_default_str();
  simulate->add_option("--mu", config.scenario_mu, "mask-swamp outlier mean")->capture_default_str();
  simulate->add_option("--beta", config.scenario_beta, "mask-swamp shift mean")->capture_default_str();
  simulate->add_option("--max-block", config.max_block)->capture_default_str();
  simulate->add_option("--replications", config.replications)->capture_default_str();
  simulate->add_option("--level", config.level)->capture_default_str();
  simulate->add_option("--mixture-replicates", config.mixture_replicates)->capture_default_str();
  add_calibration(simulate);

  auto* ccdf = app.add_subcommand("ccdf", "empirical CCDF as (value, rank/n)");
  add_common(ccdf);
  add_ingest(ccdf);

  auto* layers = app.add_subcommand("layers", "layered Pareto fit and LRT against one Pareto");
  add_common(layers);
  add_ingest(layers);
  layers->add_option("--breakpoints", config.breakpoints, "ascending; the first is the threshold")
      ->delimiter(',')
      ->required();

  auto* rerun = app.add_subcommand("rerun", "replay a report from its config echo");
  add_common(rerun);
  add_input(rerun);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    return {std::nullopt, out.str() + err.str(), code == 0 ? 0 : 2};
  }

  for (const auto& [c, name] : kCommands) {
    if (app.got_subcommand(std::string(name))) config.command = c;
  }

  if (raw.statistic.empty()) {
    raw.statistic = config.command == Command::test                                            ? "ss"
                    : config.command == Command::calibrate || config.command == Command::outward ? "ms"
                                                                                                 : "mrs";
  }
  std::vector<std::string> problems;
  if (auto s = parse_statistic_kind(raw.statistic)) config.statistic = *s;
  else problems.push_back("--stat: unknown statistic '" + raw.statistic + "'");
  if (auto v = parse_inward_reference(raw.inward_reference)) config.inward_reference = *v;
  else problems.push_back("--inward-reference: unknown value '" + raw.inward_reference + "'");
  if (auto v = parse_procedure_kind(raw.procedure)) config.procedure = *v;
  else problems.push_back("--procedure: unknown value '" + raw.procedure + "'");
  if (auto v = parse_tail_model(raw.tail_model)) config.tail_model = *v;
  else problems.push_back("--tail-model: unknown value '" + raw.tail_model + "'");
  if (auto v = parse_transform(raw.transform)) config.transform = *v;
  else problems.push_back("--transform: unknown value '" + raw.transform + "'");
  if (auto v = parse_study(raw.study)) config.study = *v;
  else problems.push_back("--study: unknown value '" + raw.study + "'");
  if (raw.format == "json") config.format = OutputFormat::json;
  else if (raw.format == "csv") config.format = OutputFormat::csv;
  else if (!raw.format.empty()) problems.push_back("--format: expected json or csv, got '" + raw.format + "'");

  if (seed) {
    config.seed = *seed;
  } else {
    config.seed = entropy_seed();
    config.seed_from_entropy = true;
  }
  config.table_seed = table_seed.value_or(kDefaultTableSeed);
  config.calibration_seed = calibration_seed.value_or(kDefaultCalibrationSeed);
  if (!config.cache_dir) {
    if (auto it = environment.find(std::string(kCacheEnvVar)); it != environment.end() && !it->second.empty()) {
      config.cache_dir = it->second;
    }
  }

  for (auto& p : validate(config)) problems.push_back(std::move(p));
  if (!problems.empty()) {
    std::string message = "usage error:\n";
    for (const auto& p : problems) message += "  " + p + "\n";
    return {std::nullopt, message, 2};
  }
  return {config, "", 0};
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> problems;
  auto unit_open = [](double v) { return v > 0.0 && v < 1.0; };
  if (!unit_open(c.level)) problems.push_back("--level must be in (0, 1), got " + std::to_string(c.level));
  if (c.marginal_level && !unit_open(*c.marginal_level)) problems.push_back("--b must be in (0, 1)");
  if (c.r < 1) problems.push_back("--r must be >= 1");
  if (c.transform == Transform::excess && !c.threshold) problems.push_back("--transform excess needs --u");
  if (c.transform == Transform::log && c.threshold && !(*c.threshold > 0.0)) {
    problems.push_back("--transform log needs --u > 0");
  }
  if (c.m && *c.m < 1) problems.push_back("--m must be >= 1");
  if (!(c.tolerance > 0.0 && c.tolerance < 1.0)) problems.push_back("--tolerance must be in (0, 1)");
  if (c.table_replicates < 1) problems.push_back("--table-replicates must be >= 1");
  if (c.calibration_replicates < 1) problems.push_back("--calibration-replicates must be >= 1");
  if (c.mixture_replicates < 1) problems.push_back("--mixture-replicates must be >= 1");
  if (c.replications < 1) problems.push_back("--replications must be >= 1");

  const std::size_t m = effective_m(c);
  switch (c.command) {
    case Command::calibrate:
      if (c.n < 3) problems.push_back("--n must be >= 3");
      if (c.r > m) problems.push_back("--r must not exceed --m");
      if (m >= c.n) problems.push_back("--m must be < --n");
      break;
    case Command::outward:
      if (c.r > m) problems.push_back("--r must not exceed --m");
      break;
    case Command::sweep:
    case Command::drawdowns:
      if (c.n_min < 3) problems.push_back("--nmin must be >= 3");
      if (c.n_max && *c.n_max <= c.n_min) problems.push_back("--nmax must exceed --nmin");
      break;
    default: break;
  }
  if (c.command == Command::drawdowns) {
    if (!(c.epsilon >= 0.0)) problems.push_back("--epsilon must be >= 0");
    if (!(c.delta > 0.0)) problems.push_back("--delta must be > 0");
  }
  if (c.command == Command::layers) {
    if (c.breakpoints.empty()) problems.push_back("--breakpoints needs at least one value");
    if (!c.breakpoints.empty() && !(c.breakpoints.front() > 0.0)) problems.push_back("--breakpoints must be > 0");
    if (!std::is_sorted(c.breakpoints.begin(), c.breakpoints.end(), std::less_equal<>())) {
      problems.push_back("--breakpoints must be strictly ascending");
    }
  }
  if (c.command == Command::simulate) {
    switch (c.study) {
      case Study::sequential:
        if (c.study_n != 50 && c.study_n != 30 && c.study_n != 15) {
          problems.push_back("--n must be 50, 30 or 15 for the sequential study");
        }
        break;
      case Study::power:
        if (!parse_power_case(c.power_case)) problems.push_back("--case must be single, dispersed or clustered");
        break;
      case Study::mask_swamp:
        if (!parse_scenario_kind(c.scenario)) problems.push_back("--scenario: unknown kind '" + c.scenario + "'");
        if (c.max_block < 1 || c.max_block + 1 >= c.study_n) problems.push_back("--max-block must be in [1, n-2]");
        break;
      case Study::robustness:
        if (c.kappas.empty()) problems.push_back("--kappa needs at least one value");
        for (double k : c.kappas) {
          if (!(k > 0.0)) problems.push_back("--kappa values must be > 0");
        }
        break;
    }
  }
  if (c.format == OutputFormat::csv && !supports_csv(c.command)) {
    problems.push_back("--format csv is not available for " + std::string(to_string(c.command)));
  }

  if (needs_input(c.command)) {
    if (c.inputs.empty()) problems.push_back("an input file is required");
    for (const auto& path : c.inputs) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(path, ec)) {
        problems.push_back("input '" + path + "' is not a readable file");
      } else if (!std::ifstream(path)) {
        problems.push_back("input '" + path + "' cannot be opened");
      }
    }
  }
  return problems;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = to_string(c.command);
  j["inputs"] = c.inputs;
  j["column"] = c.column ? nlohmann::json(*c.column) : nlohmann::json();
  j["threshold"] = c.threshold ? nlohmann::json(*c.threshold) : nlohmann::json();
  j["transform"] = to_string(c.transform);
  j["statistic"] = short_name(c.statistic);
  j["r"] = c.r;
  j["m"] = effective_m(c);
  j["n"] = c.n;
  j["level"] = c.level;
  j["marginal_level"] = c.marginal_level ? nlohmann::json(*c.marginal_level) : nlohmann::json();
  j["inward_reference"] = to_string(c.inward_reference);
  j["procedure"] = to_string(c.procedure);
  j["tail_model"] = to_string(c.tail_model);
  j["n_min"] = c.n_min;
  j["n_max"] = c.n_max ? nlohmann::json(*c.n_max) : nlohmann::json();
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["include_drawups"] = c.include_drawups;
  j["include_censored"] = c.include_censored;
  j["study"] = to_string(c.study);
  j["study_n"] = c.study_n;
  j["power_case"] = c.power_case;
  j["kappas"] = c.kappas;
  j["scenario"] = c.scenario;
  j["scenario_k"] = c.scenario_k;
  j["scenario_mu"] = c.scenario_mu;
  j["scenario_beta"] = c.scenario_beta;
  j["max_block"] = c.max_block;
  j["replications"] = c.replications;
  j["breakpoints"] = c.breakpoints;
  j["seed"] = c.seed;
  j["seed_from_entropy"] = c.seed_from_entropy;
  j["table_replicates"] = c.table_replicates;
  j["table_seed"] = c.table_seed;
  j["calibration_replicates"] = c.calibration_replicates;
  j["calibration_seed"] = c.calibration_seed;
  j["tolerance"] = c.tolerance;
  j["mixture_replicates"] = c.mixture_replicates;
  j["threads"] = c.threads;
  j["format"] = to_string(effective_format(c));
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    auto text = [&](const char* key) { return j.at(key).get<std::string>(); };
    auto require = [](auto parsed, const std::string& what) {
      if (!parsed) throw Error(ErrorCode::usage, "config echo has an invalid " + what);
      return *parsed;
    };
    c.command = require(parse_command(text("command")), "command");
    c.inputs = j.at("inputs").get<std::vector<std::string>>();
    if (!j.at("column").is_null()) c.column = text("column");
    if (!j.at("threshold").is_null()) c.threshold = j.at("threshold").get<double>();
    c.transform = require(parse_transform(text("transform")), "transform");
    c.statistic = require(parse_statistic_kind(text("statistic")), "statistic");
    c.r = j.at("r").get<std::size_t>();
    c.m = j.at("m").get<std::size_t>();
    c.n = j.at("n").get<std::size_t>();
    c.level = j.at("level").get<double>();
    if (!j.at("marginal_level").is_null()) c.marginal_level = j.at("marginal_level").get<double>();
    c.inward_reference = require(parse_inward_reference(text("inward_reference")), "inward_reference");
    c.procedure = require(parse_procedure_kind(text("procedure")), "procedure");
    c.tail_model = require(parse_tail_model(text("tail_model")), "tail_model");
    c.n_min = j.at("n_min").get<std::size_t>();
    if (!j.at("n_max").is_null()) c.n_max = j.at("n_max").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.delta = j.at("delta").get<double>();
    c.include_drawups = j.at("include_drawups").get<bool>();
    c.include_censored = j.at("include_censored").get<bool>();
    c.study = require(parse_study(text("study")), "study");
    c.study_n = j.at("study_n").get<std::size_t>();
    c.power_case = text("power_case");
    c.kappas = j.at("kappas").get<std::vector<double>>();
    c.scenario = text("scenario");
    c.scenario_k = j.at("scenario_k").get<std::size_t>();
    c.scenario_mu = j.at("scenario_mu").get<double>();
    c.scenario_beta = j.at("scenario_beta").get<double>();
    c.max_block = j.at("max_block").get<std::size_t>();
    c.replications = j.at("replications").get<std::size_t>();
    c.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.table_replicates = j.at("table_replicates").get<std::size_t>();
    c.table_seed = j.at("table_seed").get<std::uint64_t>();
    c.calibration_replicates = j.at("calibration_replicates").get<std::size_t>();
    c.calibration_seed = j.at("calibration_seed").get<std::uint64_t>();
    c.tolerance = j.at("tolerance").get<double>();
    c.mixture_replicates = j.at("mixture_replicates").get<std::size_t>();
    c.threads = j.at("threads").get<unsigned>();
    c.format = text("format") == "csv" ? OutputFormat::csv : OutputFormat::json;
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::usage, std::string("config echo is malformed: ") + e.what());
  }
}

}  // namespace tailtest::cli
