// did: estimation, simulation, bound, and placebo workflows on the command
// line. Output is a flat key=value record (one line per key; one `cell ...`
// line per experiment grid entry) with no timestamps, so identical inputs
// and seeds produce byte-identical output.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "did/bounds.hpp"
#include "did/harness.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Record {
  std::ostringstream out;

  void put(const std::string& key, const std::string& value) {
    out << key << '=' << value << '\n';
  }
  void put(const std::string& key, double value) { put(key, fmt(value)); }
  void put(const std::string& key, long value) { put(key, std::to_string(value)); }
  void put(const std::string& key, int value) { put(key, std::to_string(value)); }
  void put(const std::string& key, std::uint64_t value) {
    put(key, std::to_string(value));
  }

  void write(const std::string& path) const {
    if (path.empty()) {
      std::cout << out.str();
      return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) did::fail(did::ErrorCode::Io, "cannot open " + path);
    file << out.str();
    if (!file) did::fail(did::ErrorCode::Io, "cannot write " + path);
  }
};

json load_json(const std::string& path) {
  std::ifstream file(path);
  if (!file) did::fail(did::ErrorCode::Io, "cannot open " + path);
  try {
    return json::parse(file);
  } catch (const json::exception& e) {
    did::fail(did::ErrorCode::Config, path + ": " + e.what());
  }
}

did::LinearFunction linear_from_json(const json& j, const std::string& key) {
  did::LinearFunction f;
  if (j.is_number()) {
    f.intercept = j.get<double>();
    return f;
  }
  if (!j.is_object())
    did::fail(did::ErrorCode::Config,
              key + " must be a number or {intercept, slope}");
  f.intercept = j.value("intercept", 0.0);
  if (j.contains("slope")) {
    const auto& slope = j.at("slope");
    if (!slope.is_array())
      did::fail(did::ErrorCode::Config, key + ".slope must be an array");
    f.slope = Eigen::VectorXd(static_cast<int>(slope.size()));
    for (int i = 0; i < f.slope.size(); ++i) f.slope[i] = slope[i].get<double>();
  }
  return f;
}

// Starts from the setting's default law and overrides the supplied fields.
did::DgpSpec dgp_from_json(const json& j) {
  if (!j.is_object()) did::fail(did::ErrorCode::Config, "dgp must be an object");
  if (!j.contains("setting"))
    did::fail(did::ErrorCode::Config, "dgp.setting is required");
  did::DgpSpec spec = did::default_spec(did::parse_setting(j.at("setting")));
  try {
    spec.n = j.value("n", spec.n);
    spec.seed = j.value("seed", spec.seed);
    spec.p = j.value("p", spec.p);
    spec.p_d_const = j.value("p_d_const", spec.p_d_const);
    spec.p_t_const = j.value("p_t_const", spec.p_t_const);
    spec.sigma = j.value("sigma", spec.sigma);
    spec.rho = j.value("rho", spec.rho);
    for (const char* key : {"base", "trend", "group", "effect", "pd_index",
                            "pt_index"})
      if (j.contains(key)) {
        did::LinearFunction f = linear_from_json(j.at(key), key);
        if (std::string(key) == "base") spec.base = f;
        else if (std::string(key) == "trend") spec.trend = f;
        else if (std::string(key) == "group") spec.group = f;
        else if (std::string(key) == "effect") spec.effect = f;
        else if (std::string(key) == "pd_index") spec.pd_index = f;
        else spec.pt_index = f;
      }
    if (j.contains("pd_index_t"))
      for (int t = 0; t < 2; ++t)
        spec.pd_index_t[t] = linear_from_json(j.at("pd_index_t").at(t), "pd_index_t");
    if (j.contains("cell_index"))
      for (int d = 0; d < 2; ++d)
        for (int t = 0; t < 2; ++t)
          spec.cell_index[d][t] =
              linear_from_json(j.at("cell_index").at(d).at(t), "cell_index");
  } catch (const json::exception& e) {
    did::fail(did::ErrorCode::Config, std::string("dgp: ") + e.what());
  }
  did::validate_spec(spec);
  return spec;
}

// A spec from --config (full control) or --dgp (the setting's default law).
did::DgpSpec resolve_dgp(const std::string& config_path,
                         const std::string& dgp_name) {
  if (!config_path.empty() && !dgp_name.empty())
    did::fail(did::ErrorCode::Usage, "pass either --config or --dgp, not both");
  if (!config_path.empty()) {
    const json j = load_json(config_path);
    return dgp_from_json(j.contains("dgp") ? j.at("dgp") : j);
  }
  if (!dgp_name.empty()) return did::default_spec(did::parse_setting(dgp_name));
  did::fail(did::ErrorCode::Usage, "a DGP is required: pass --config or --dgp");
}

did::ExperimentSpec experiment_from_json(const json& j) {
  if (!j.is_object())
    did::fail(did::ErrorCode::Config, "experiment config must be an object");
  if (!j.contains("dgp") || !j.contains("estimators") || !j.contains("sample_sizes"))
    did::fail(did::ErrorCode::Config,
              "experiment config needs dgp, estimators, and sample_sizes");
  did::ExperimentSpec spec;
  spec.dgp = dgp_from_json(j.at("dgp"));
  try {
    for (const json& e : j.at("estimators")) {
      did::EstimatorSpec est;
      est.setting = did::parse_setting(e.at("setting"));
      est.variant = did::parse_variant(e.value("variant", "efficient"));
      est.oracle = e.value("oracle", false);
      est.learner = did::learner_spec_from_name(e.value("learner", "ensemble"));
      est.folds = e.value("folds", 2);
      est.eps = e.value("eps", 0.01);
      spec.estimators.push_back(est);
    }
    for (const json& n : j.at("sample_sizes"))
      spec.sample_sizes.push_back(n.get<int>());
    spec.replications = j.value("replications", 100);
    spec.confidence = j.value("confidence", 0.95);
    spec.master_seed = j.value("master_seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    did::fail(did::ErrorCode::Config, std::string("experiment: ") + e.what());
  }
  return spec;
}

struct CommonFlags {
  std::string variant = "efficient";
  std::string learner = "ensemble";
  int folds = 2;
  std::uint64_t seed = 0;
  double eps = 0.01;
  std::string out;
  int threads = 1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_learner) {
  if (with_learner) {
    cmd->add_option("--learner", flags.learner,
                    "first stage: linear, lasso, forest, or ensemble")
        ->capture_default_str();
    cmd->add_option("--folds,-k", flags.folds, "cross-fitting folds")
        ->capture_default_str()
        ->check(CLI::Range(2, 100));
    cmd->add_option("--eps", flags.eps, "probability trimming floor")
        ->capture_default_str();
  }
  cmd->add_option("--seed", flags.seed, "master random seed")
      ->capture_default_str();
  cmd->add_option("--out,-o", flags.out, "output file (default: stdout)");
  cmd->add_option("--threads", flags.threads,
                  "worker cap (all current stages are single-threaded)")
      ->check(CLI::PositiveNumber);
}

void put_estimate(Record& rec, const did::EstimateResult& res) {
  const double z = did::normal_quantile(0.975);
  rec.put("setting", did::to_string(res.setting));
  rec.put("variant", did::to_string(res.variant));
  rec.put("n", res.n);
  rec.put("theta", res.theta_hat);
  rec.put("se", res.std_error);
  rec.put("ci_lower", res.theta_hat - z * res.std_error);
  rec.put("ci_upper", res.theta_hat + z * res.std_error);
  rec.put("mean_psi_b", res.mean_psi_b);
  rec.put("min_prob", res.min_prob);
  rec.put("max_prob", res.max_prob);
  rec.put("folds", res.folds);
  rec.put("seed", res.seed);
}

int run_estimate(const std::string& data_path, const std::string& setting_name,
                 const CommonFlags& flags) {
  const did::Setting setting = did::parse_setting(setting_name);
  const did::Variant variant = did::parse_variant(flags.variant);
  if (!did::compatible(setting, variant))
    did::fail(did::ErrorCode::IncompatiblePair,
              setting_name + " does not support variant " + flags.variant);
  did::CrossfitOptions options;
  options.learner = did::learner_spec_from_name(flags.learner);
  options.k = flags.folds;
  options.seed = flags.seed;
  options.eps = flags.eps;

  did::EstimateResult res;
  long clipped = 0;
  if (did::is_panel(setting)) {
    const did::PanelDataset data = did::read_panel_csv(data_path);
    const did::NuisanceEstimates nuis = did::crossfit(data, setting, variant, options);
    clipped = nuis.clipped_count;
    res = did::estimate(data, nuis, setting, variant);
  } else {
    const did::CrossSectionDataset data = did::read_cross_section_csv(data_path);
    const did::NuisanceEstimates nuis = did::crossfit(data, setting, variant, options);
    clipped = nuis.clipped_count;
    res = did::estimate(data, nuis, setting, variant);
  }
  Record rec;
  rec.put("command", "estimate");
  rec.put("data", data_path);
  rec.put("learner", flags.learner);
  rec.put("eps", flags.eps);
  put_estimate(rec, res);
  rec.put("clipped", clipped);
  rec.write(flags.out);
  return 0;
}

int run_simulate(const std::string& config_path, const CommonFlags& flags) {
  const did::ExperimentSpec spec = experiment_from_json(load_json(config_path));
  const did::ExperimentReport report = did::run_experiment(spec);
  Record rec;
  rec.put("command", "simulate");
  rec.put("config", config_path);
  rec.put("theta_true", report.theta_true);
  rec.put("replications", report.replications);
  for (const did::ExperimentCell& cell : report.cells) {
    rec.out << "cell setting=" << did::to_string(cell.setting)
            << " variant=" << did::to_string(cell.variant)
            << " oracle=" << (cell.oracle ? 1 : 0) << " n=" << cell.n
            << " mean_bias=" << fmt(cell.mean_bias) << " sd=" << fmt(cell.sd)
            << " mean_se=" << fmt(cell.mean_se)
            << " coverage=" << fmt(cell.coverage) << '\n';
  }
  rec.write(flags.out);
  return 0;
}

int run_bounds(const std::string& config_path, const std::string& dgp_name,
               const std::string& setting_name, const std::string& pair_name,
               long n_mc, const CommonFlags& flags) {
  const did::DgpSpec spec = resolve_dgp(config_path, dgp_name);
  Record rec;
  rec.put("command", "bounds");
  if (!pair_name.empty()) {
    const did::DeltaReport report = did::delta_closed_form(
        did::parse_delta_pair(pair_name), spec, n_mc, flags.seed);
    rec.put("pair", did::to_string(report.pair));
    rec.put("closed_form", report.closed_form);
    rec.put("closed_form_se", report.closed_form_se);
    rec.put("from_bounds", report.from_bounds);
    rec.put("from_bounds_se", report.from_bounds_se);
    rec.put("n_mc", report.n_mc);
    rec.put("seed", report.seed);
  } else {
    if (setting_name.empty())
      did::fail(did::ErrorCode::Usage, "pass --setting or --pair");
    const did::Setting setting = did::parse_setting(setting_name);
    const did::Variant variant = did::parse_variant(flags.variant);
    if (!did::compatible(setting, variant))
      did::fail(did::ErrorCode::IncompatiblePair,
                setting_name + " does not support variant " + flags.variant);
    const did::BoundReport report =
        did::efficiency_bound_mc(spec, setting, variant, n_mc, flags.seed);
    rec.put("setting", did::to_string(report.setting));
    rec.put("variant", did::to_string(report.variant));
    rec.put("bound", report.bound);
    rec.put("mc_se", report.mc_std_error);
    rec.put("n_mc", report.n_mc);
    rec.put("seed", report.seed);
  }
  rec.write(flags.out);
  return 0;
}

int run_placebo(const std::string& data_path, int split_period,
                const std::string& setting_name, const CommonFlags& flags) {
  const did::Setting setting = did::parse_setting(setting_name);
  const did::Variant variant = did::parse_variant(flags.variant);
  if (did::is_panel(setting))
    did::fail(did::ErrorCode::IncompatiblePair,
              "placebo relabeling needs a cross-section setting");
  if (!did::compatible(setting, variant))
    did::fail(did::ErrorCode::IncompatiblePair,
              setting_name + " does not support variant " + flags.variant);
  did::CrossfitOptions options;
  options.learner = did::learner_spec_from_name(flags.learner);
  options.k = flags.folds;
  options.seed = flags.seed;
  options.eps = flags.eps;
  const did::PrePeriodData data = did::read_pre_period_csv(data_path);
  const did::EstimateResult res =
      did::run_placebo(data, split_period, setting, variant, options);
  const double z = res.std_error > 0 ? res.theta_hat / res.std_error : 0.0;
  Record rec;
  rec.put("command", "placebo");
  rec.put("data", data_path);
  rec.put("split_period", split_period);
  rec.put("learner", flags.learner);
  put_estimate(rec, res);
  rec.put("z_stat", z);
  rec.put("significant_5pct",
          std::abs(z) > did::normal_quantile(0.975) ? 1 : 0);
  rec.write(flags.out);
  return 0;
}

int run_generate(const std::string& config_path, const std::string& dgp_name,
                 int n_override, std::int64_t seed_override,
                 const std::string& data_out, const CommonFlags& flags) {
  did::DgpSpec spec = resolve_dgp(config_path, dgp_name);
  if (n_override > 0) spec.n = n_override;
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
  did::validate_spec(spec);
  if (did::is_panel(spec.setting))
    did::write_csv(did::generate_panel(spec), data_out);
  else
    did::write_csv(did::generate_cross_section(spec), data_out);
  Record rec;
  rec.put("command", "generate");
  rec.put("setting", did::to_string(spec.setting));
  rec.put("n", spec.n);
  rec.put("p", spec.p);
  rec.put("seed", spec.seed);
  rec.put("theta_true", spec.theta_true());
  rec.put("data", data_out);
  rec.write(flags.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "did: semiparametric difference-in-differences estimation of the ATET\n"
      "under seven assumption settings, with cross-fitted first stages,\n"
      "influence-function inference, efficiency bounds, and placebo tests.\n\n"
      "Output records are flat key=value lines (experiment grids add one\n"
      "'cell ...' line per entry); identical inputs and seeds give\n"
      "byte-identical output.\n\n"
      "Exit codes: 0 ok; 2 UsageError; 3 ConfigError; 4 invalid input\n"
      "(NonBinaryIndicator, NonFiniteValue, EmptyCell, EmptyGroup,\n"
      "InconsistentDimension, InvalidFoldCount, IncompatiblePair,\n"
      "UnknownTarget, UnsupportedPair, SinglePeriod); 5 fitting failure\n"
      "(SingleClass, NoConvergence, DegeneratePath, DimensionOverflow);\n"
      "6 estimation failure (EmptyTrainingCell, MissingNuisance,\n"
      "DegenerateDenominator); 7 InfeasibleSpec; 8 IoError."};
  app.require_subcommand(1);

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "Estimate theta from a CSV dataset.\n"
                  "Cross-section schema: y,d,t,x1..xp; panel: y0,y1,d,x1..xp.\n"
                  "Record keys: command data learner eps setting variant n\n"
                  "theta se ci_lower ci_upper mean_psi_b min_prob max_prob\n"
                  "folds seed clipped");
  std::string est_data, est_setting;
  CommonFlags est_flags;
  estimate->add_option("--data", est_data, "input CSV")->required();
  estimate->add_option("--setting", est_setting,
                       "cs1, cs2, cs3, cs4, cs5, pa1, or pa2")
      ->required();
  estimate->add_option("--variant", est_flags.variant,
                       "efficient, star2, star3, prime-cs2, prime-cs4, ipw, "
                       "or diffmeans")
      ->capture_default_str();
  add_common_flags(estimate, est_flags, true);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Run a Monte Carlo experiment from a JSON config with keys\n"
                  "dgp, estimators, sample_sizes, replications, confidence,\n"
                  "master_seed. Record keys: command config theta_true\n"
                  "replications, then one 'cell ...' line per grid entry with\n"
                  "setting variant oracle n mean_bias sd mean_se coverage");
  std::string sim_config;
  CommonFlags sim_flags;
  simulate->add_option("--config", sim_config, "experiment JSON")->required();
  add_common_flags(simulate, sim_flags, false);

  // bounds
  auto* bounds = app.add_subcommand(
      "bounds", "Monte Carlo efficiency bound for one setting/variant\n"
                "(--setting), or a closed-form variance gap cross-checked\n"
                "against differenced bounds (--pair cs1-cs2, cs1-cs3,\n"
                "cs1-cs4, cs1-cs5, pa1-pa2, cs1-pa1, cs5-pa1,\n"
                "loss-prime-cs2, loss-prime-cs4). The law comes from\n"
                "--config (JSON DgpSpec) or --dgp (a setting's default law)");
  std::string bounds_config, bounds_dgp, bounds_setting, bounds_pair;
  long bounds_n_mc = 1000000;
  CommonFlags bounds_flags;
  bounds->add_option("--config", bounds_config, "DGP JSON");
  bounds->add_option("--dgp", bounds_dgp, "default law for this setting");
  bounds->add_option("--setting", bounds_setting, "bound to evaluate");
  bounds->add_option("--variant", bounds_flags.variant, "score variant")
      ->capture_default_str();
  bounds->add_option("--pair", bounds_pair, "variance-gap pair");
  bounds->add_option("--n-mc", bounds_n_mc, "Monte Carlo draws")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_common_flags(bounds, bounds_flags, false);

  // placebo
  auto* placebo = app.add_subcommand(
      "placebo", "Common-trend placebo test on pre-period data\n"
                 "(CSV schema: y,d,period,x1..xp). Periods after\n"
                 "--split become the pseudo post period");
  std::string pl_data, pl_setting = "cs4";
  int pl_split = 0;
  CommonFlags pl_flags;
  placebo->add_option("--data", pl_data, "pre-period CSV")->required();
  placebo->add_option("--split", pl_split, "last period of the pseudo pre era")
      ->required();
  placebo->add_option("--setting", pl_setting, "cross-section setting")
      ->capture_default_str();
  placebo->add_option("--variant", pl_flags.variant, "score variant")
      ->capture_default_str();
  add_common_flags(placebo, pl_flags, true);

  // generate
  auto* generate = app.add_subcommand(
      "generate", "Write a synthetic dataset with known theta to CSV");
  std::string gen_config, gen_dgp, gen_out;
  int gen_n = 0;
  std::int64_t gen_seed = -1;
  CommonFlags gen_flags;
  generate->add_option("--config", gen_config, "DGP JSON");
  generate->add_option("--dgp", gen_dgp, "default law for this setting");
  generate->add_option("--n", gen_n, "override the sample size")
      ->check(CLI::PositiveNumber);
  generate->add_option("--gen-seed", gen_seed, "override the DGP seed");
  generate->add_option("--data-out", gen_out, "output CSV path")->required();
  add_common_flags(generate, gen_flags, false);

  try {
    app.parse(argc, argv);
    if (estimate->parsed())
      return run_estimate(est_data, est_setting, est_flags);
    if (simulate->parsed()) return run_simulate(sim_config, sim_flags);
    if (bounds->parsed())
      return run_bounds(bounds_config, bounds_dgp, bounds_setting, bounds_pair,
                        bounds_n_mc, bounds_flags);
    if (placebo->parsed())
      return run_placebo(pl_data, pl_split, pl_setting, pl_flags);
    if (generate->parsed())
      return run_generate(gen_config, gen_dgp, gen_n, gen_seed, gen_out,
                          gen_flags);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "UsageError: " << e.what() << '\n';
    return did::exit_code(did::ErrorCode::Usage);
  } catch (const did::DidError& e) {
    std::cerr << e.what() << '\n';
    return did::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
