#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "ruelle/error.hpp"
#include "ruelle/extremality.hpp"
#include "ruelle/io.hpp"
#include "ruelle/measure.hpp"
#include "ruelle/path_space.hpp"
#include "ruelle/reference_measure.hpp"
#include "ruelle/transfer.hpp"

#ifndef RUELLE_VERSION
#define RUELLE_VERSION "0.0.0"
#endif

namespace ruelle::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kMassConservationSteps = 10;
constexpr int kPushforwardPowers = 3;

const std::set<std::string> kAllowedKeys = {
    "k",     "matrix", "V",       "mu0",   "filter", "marginal_overrides", "depth",
    "tol",   "n_max",  "samples", "seed",  "steps",  "levels",             "description"};

struct Flags {
  std::string config;
  std::string out_dir = ".";
  int depth = 0;
  double tol = 0.0;
  int max_iter = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  int workers = 1;
  CLI::Option* depth_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* max_iter_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
};

// Everything a subcommand needs, validated up front.
struct Job {
  json config;
  std::string hash;
  SystemDocument system;
  MarkovMeasure rho;
  // nullopt means "auto": h_V d rho.
  std::optional<CylinderFunction> mu0_density;
  std::optional<ComplexCylinderFunction> filter;
  std::map<int, CylinderFunction> overrides;
  int depth;
  double tol;
  int n_max;
  std::uint64_t samples;
  std::uint64_t seed;
  int steps;
  int levels;
  int workers;
  fs::path out_dir;
};

Error config_error(const std::string& message) { return Error(ErrorCode::kConfig, message); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot write '" + path.string() + "'");
  out << text;
}

template <typename T>
T get_checked(const json& config, const char* key, T fallback) {
  if (!config.contains(key)) return fallback;
  try {
    return config.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

CylinderFunction real_table(const Subshift& shift, const json& node, const std::string& what) {
  if (!node.is_object() || !node.contains("depth") || !node.contains("values") ||
      !node.at("values").is_object() || !node.at("depth").is_number_integer()) {
    throw config_error(what + " needs an integer 'depth' and a 'values' object");
  }
  std::vector<std::pair<std::string, double>> entries;
  for (const auto& [key, value] : node.at("values").items()) {
    if (!value.is_number()) throw config_error(what + " value for '" + key + "' is not a number");
    entries.emplace_back(key, value.get<double>());
  }
  return function_from_table(shift, node.at("depth").get<int>(), entries);
}

ComplexCylinderFunction complex_table(const Subshift& shift, const json& node) {
  if (!node.is_object() || !node.contains("depth") || !node.contains("values") ||
      !node.at("values").is_object() || !node.at("depth").is_number_integer()) {
    throw config_error("filter needs an integer 'depth' and a 'values' object");
  }
  std::vector<std::pair<std::string, std::complex<double>>> entries;
  for (const auto& [key, value] : node.at("values").items()) {
    if (value.is_number()) {
      entries.emplace_back(key, std::complex<double>(value.get<double>(), 0.0));
    } else if (value.is_array() && value.size() == 2 && value[0].is_number() &&
               value[1].is_number()) {
      entries.emplace_back(key,
                           std::complex<double>(value[0].get<double>(), value[1].get<double>()));
    } else {
      throw config_error("filter value for '" + key + "' must be a number or [re, im]");
    }
  }
  return function_from_table(shift, node.at("depth").get<int>(), entries);
}

Job load_job(const Flags& flags) {
  json config;
  try {
    config = json::parse(read_file(flags.config));
  } catch (const json::exception& e) {
    throw config_error(std::string("invalid JSON in config: ") + e.what());
  }
  if (!config.is_object()) throw config_error("config must be a JSON object");
  for (const auto& [key, value] : config.items()) {
    if (!kAllowedKeys.count(key)) throw config_error("unknown config key '" + key + "'");
  }

  // Flags win over config values.
  if (flags.depth_opt->count()) config["depth"] = flags.depth;
  if (flags.tol_opt->count()) config["tol"] = flags.tol;
  if (flags.max_iter_opt->count()) config["n_max"] = flags.max_iter;
  if (flags.samples_opt->count()) config["samples"] = flags.samples;
  if (flags.seed_opt->count()) config["seed"] = flags.seed;
  if (flags.steps_opt->count()) config["steps"] = flags.steps;

  json system_doc = {{"k", config.value("k", json())},
                     {"matrix", config.value("matrix", json())},
                     {"V", config.value("V", json())}};
  for (const char* key : {"k", "matrix", "V"}) {
    if (!config.contains(key)) throw config_error(std::string("missing config key '") + key + "'");
  }
  SystemDocument system = parse_system(system_doc.dump());
  MarkovMeasure rho = strongly_invariant_measure(system.shift);

  Job job{config,
          fnv1a_hex(config.dump()),
          std::move(system),
          std::move(rho),
          std::nullopt,
          std::nullopt,
          {},
          get_checked<int>(config, "depth", 3),
          get_checked<double>(config, "tol", 1e-10),
          get_checked<int>(config, "n_max", 10'000),
          get_checked<std::uint64_t>(config, "samples", 100'000),
          get_checked<std::uint64_t>(config, "seed", 42),
          get_checked<int>(config, "steps", 3),
          get_checked<int>(config, "levels", 6),
          std::max(flags.workers, 1),
          fs::path(flags.out_dir)};

  if (job.depth < 1) throw config_error("depth must be >= 1");
  if (!(job.tol > 0.0)) throw config_error("tol must be positive");
  if (job.n_max < 1) throw config_error("n_max must be >= 1");
  if (job.steps < 0) throw config_error("steps must be >= 0");
  if (job.levels < 0) throw config_error("levels must be >= 0");

  const Subshift& shift = job.system.shift;
  if (config.contains("mu0")) {
    const auto& node = config.at("mu0");
    if (node.is_string()) {
      if (node.get<std::string>() != "auto") throw config_error("mu0 must be \"auto\" or a table");
    } else {
      job.mu0_density = real_table(shift, node, "mu0");
      require_nonnegative(*job.mu0_density, "mu0 density");
    }
  }
  if (config.contains("filter")) job.filter = complex_table(shift, config.at("filter"));
  if (config.contains("marginal_overrides")) {
    const auto& node = config.at("marginal_overrides");
    if (!node.is_object()) throw config_error("marginal_overrides must be an object");
    for (const auto& [key, value] : node.items()) {
      int level = -1;
      try {
        std::size_t used = 0;
        level = std::stoi(key, &used);
        if (used != key.size()) level = -1;
      } catch (const std::exception&) {
        level = -1;
      }
      if (level < 0) throw config_error("marginal override level '" + key + "' is not an index");
      auto f = real_table(shift, value, "marginal override " + key);
      require_nonnegative(f, "marginal override");
      job.overrides.emplace(level, std::move(f));
    }
  }
  return job;
}

json base_report(const Job& job, const std::string& command) {
  return json{{"version", RUELLE_VERSION}, {"config_hash", job.hash}, {"command", command}};
}

json function_json(const CylinderFunction& f) {
  json out = json::object();
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[format_word(f.layout().word(i), f.shift().alphabet_size())] = f.at(i);
  }
  return out;
}

json masses_json(const RawMeasure& mu) {
  json out = json::object();
  for (std::size_t i = 0; i < mu.layout().size(); ++i) {
    out[format_word(mu.layout().word(i), mu.shift().alphabet_size())] = mu.masses()[i];
  }
  return out;
}

std::string masses_csv(const RawMeasure& mu) {
  std::ostringstream out;
  write_masses_csv(out, mu.layout(), mu.masses());
  return out.str();
}

std::string function_csv(const CylinderFunction& f) {
  std::ostringstream out;
  write_function_csv(out, f);
  return out.str();
}

void emit_report(const Job& job, const std::string& name, const json& report, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  write_file(job.out_dir / (name + ".json"), text);
  out << text;
}

Measure resolve_mu0(const Job& job) {
  if (job.mu0_density) return DensityMeasure(*job.mu0_density, job.rho);
  HOptions options;
  options.max_iter = job.n_max;
  return fixed_density_measure(job.system.weight, job.rho, options).mu0;
}

PathMeasure with_overrides(PathMeasure pm, const Job& job) {
  for (const auto& [level, f] : job.overrides) {
    pm = pm.with_marginal_override(level, DensityMeasure(f, job.rho));
  }
  return pm;
}

int cmd_invariant(const Job& job, std::ostream& out, std::ostream& err) {
  const auto layout = job.system.shift.layout(job.depth);
  const RawMeasure masses(layout, job.rho.masses(*layout));
  write_file(job.out_dir / "invariant.csv", masses_csv(masses));

  const double residual = verify_strong_invariance(job.rho, job.depth);
  json report = base_report(job, "invariant");
  report["depth"] = job.depth;
  report["q"] = std::vector<double>(job.rho.symbol_masses().begin(), job.rho.symbol_masses().end());
  report["unique"] = job.rho.unique();
  report["eigenspace_dimension"] = job.rho.eigenspace_dimension();
  report["strong_invariance_residual"] = residual;
  report["pass"] = residual <= job.tol;
  emit_report(job, "invariant", report, out);

  if (!job.rho.unique()) {
    err << "warning: the strongly invariant measure is not unique (eigenspace dimension "
        << job.rho.eigenspace_dimension() << "); reporting the mixture over closed classes\n";
    return kNonUnique;
  }
  return residual <= job.tol ? kPass : kIdentityFailure;
}

int cmd_fixpoint(const Job& job, std::ostream& out, std::ostream& err) {
  const auto& weight = job.system.weight;
  HOptions options;
  options.max_iter = job.n_max;
  const HResult probe = iterate_to_h(weight, options);
  json report = base_report(job, "fixpoint");
  report["n_used"] = probe.iterations;
  report["sup_R_V_1"] = probe.sup_transfer_of_one;
  if (probe.status == HStatus::kDegenerate) {
    report["status"] = "degenerate";
    report["residual"] = probe.residual;
    emit_report(job, "fixpoint", report, out);
    err << "error: R_V^n(1) tends to 0; no fixed density exists\n";
    return kDegenerate;
  }

  const auto fixed = fixed_density_measure(weight, job.rho, options);
  const auto& h = fixed.h.h;
  write_file(job.out_dir / "h.csv", function_csv(h));
  const auto mu0 = fixed.mu0.to_raw(job.depth);
  write_file(job.out_dir / "mu0.csv", masses_csv(mu0));

  json residuals;
  residuals["h_fixed"] = sup_distance(apply_transfer(weight, h), h);
  residuals["fixed_point"] = check_fixed_point(weight, fixed.mu0, job.depth);
  const auto orbit = masses_along_orbit(weight, fixed.mu0, kMassConservationSteps);
  double drift = 0.0;
  for (double m : orbit) drift = std::max(drift, std::abs(m - orbit.front()));
  residuals["mass_conservation"] = drift;

  report["status"] = "converged";
  report["h_V"] = function_json(h);
  report["mu0"] = masses_json(mu0);
  report["mass_sequence"] = orbit;
  if (fixed.nu) {
    const CylinderFunction nu(fixed.nu->layout, fixed.nu->weights);
    write_file(job.out_dir / "nu.csv", function_csv(nu));
    report["nu_V"] = function_json(nu);
    report["nu_of_h_before_scaling"] = *fixed.nu_of_h;
    const auto tm = transfer_matrix(weight, closed_depth(weight));
    const Eigen::Map<const Eigen::VectorXd> v(fixed.nu->weights.data(),
                                              static_cast<Eigen::Index>(fixed.nu->weights.size()));
    residuals["nu_fixed"] = (tm.entries.transpose() * v - v).lpNorm<Eigen::Infinity>();
  } else {
    report["nu_V"] = nullptr;
  }
  report["residuals"] = residuals;
  bool pass = true;
  for (const auto& [key, value] : residuals.items()) pass = pass && value.get<double>() <= job.tol;
  report["pass"] = pass;
  emit_report(job, "fixpoint", report, out);
  return pass ? kPass : kIdentityFailure;
}

int cmd_verify(const Job& job, std::ostream& out, std::ostream&) {
  const auto& weight = job.system.weight;
  const Measure mu0 = resolve_mu0(job);
  const PathMeasure pm = with_overrides(PathMeasure(weight, mu0), job);
  const int d = job.depth;

  json residuals;
  residuals["strong_invariance"] = verify_strong_invariance(job.rho, d);
  residuals["fixed_point"] = check_fixed_point(weight, mu0, d);
  double consistency = 0.0;
  for (int n = 0; n < job.levels; ++n) consistency = std::max(consistency, check_consistency(pm, n, d));
  residuals["marginal_consistency"] = consistency;
  residuals["quasi_invariance"] = check_quasi_invariance(pm, d, job.levels);

  double pushforward = 0.0;
  const auto layout = job.system.shift.layout(d);
  for (std::size_t i = 0; i < layout->size(); ++i) {
    std::vector<double> indicator(layout->size(), 0.0);
    indicator[i] = 1.0;
    const CylinderFunction f(layout, std::move(indicator));
    for (int n = 1; n <= kPushforwardPowers; ++n) {
      pushforward = std::max(pushforward, check_weight_pushforward(weight, f, job.rho, n));
    }
  }
  residuals["weight_pushforward"] = pushforward;

  double drift = 0.0;
  const double base_mass = total_mass(pm.marginal(0));
  for (int n = 1; n <= job.levels; ++n) {
    drift = std::max(drift, std::abs(total_mass(pm.marginal(n)) - base_mass));
  }
  residuals["mass_conservation"] = drift;
  if (job.filter) residuals["isometry"] = check_isometry(pm, *job.filter, d, job.tol, job.levels);

  json report = base_report(job, "verify");
  report["depth"] = d;
  report["levels"] = job.levels;
  report["residuals"] = residuals;
  bool pass = true;
  for (const auto& [key, value] : residuals.items()) pass = pass && value.get<double>() <= job.tol;
  report["pass"] = pass;
  emit_report(job, "verify", report, out);
  return pass ? kPass : kIdentityFailure;
}

int cmd_sample(const Job& job, std::ostream& out, std::ostream&) {
  const auto& weight = job.system.weight;
  const PathMeasure pm =
      with_overrides(build_path_measure(weight, resolve_mu0(job), job.tol, job.depth), job);
  const auto samples =
      sample_paths(pm, job.steps, job.depth, static_cast<std::size_t>(job.samples), job.seed,
                   job.workers);
  std::ostringstream csv;
  write_samples_csv(csv, samples, job.system.shift.alphabet_size());
  write_file(job.out_dir / "samples.csv", csv.str());

  const auto empirical = empirical_check(pm, samples, job.steps, job.depth);
  json report = base_report(job, "sample");
  report["n"] = empirical.n;
  report["N"] = empirical.samples;
  report["depth"] = empirical.depth;
  report["seed"] = job.seed;
  report["max_dev"] = empirical.max_deviation;
  report["sigma_bound"] = empirical.sigma_bound;
  report["worst_ratio"] = empirical.worst_ratio;
  report["pass"] = empirical.pass;
  emit_report(job, "sample", report, out);
  return empirical.pass ? kPass : kIdentityFailure;
}

int cmd_ergodicity(const Job& job, std::ostream& out, std::ostream&) {
  const auto& weight = job.system.weight;
  const Measure mu0 = resolve_mu0(job);
  const auto report_data = relative_ergodicity_dimension(mu0, weight, job.depth, job.tol);

  json report = base_report(job, "ergodicity");
  report["depth"] = report_data.depth;
  report["solution_dim"] = report_data.solution_dim;
  report["extremal_certificate"] = report_data.extremal_certificate;
  report["singular_values"] = report_data.singular_values;
  report["max_basis_residual"] = report_data.max_basis_residual;

  if (report_data.extremal_certificate) {
    emit_report(job, "ergodicity", report, out);
    return kPass;
  }
  const auto parts = decompose(mu0, weight, job.depth, job.tol);
  if (!parts) {
    emit_report(job, "ergodicity", report, out);
    return kPass;
  }
  const auto base = to_raw(mu0, job.depth);
  const auto mu1 = to_raw(parts->mu1, job.depth);
  const auto mu2 = to_raw(parts->mu2, job.depth);
  double recombination = 0.0;
  for (std::size_t i = 0; i < base.masses().size(); ++i) {
    recombination = std::max(
        recombination, std::abs(parts->lambda * mu1.masses()[i] +
                                (1.0 - parts->lambda) * mu2.masses()[i] - base.masses()[i]));
  }
  write_file(job.out_dir / "mu1.csv", masses_csv(mu1));
  write_file(job.out_dir / "mu2.csv", masses_csv(mu2));
  write_file(job.out_dir / "f1.csv", function_csv(parts->f1));
  write_file(job.out_dir / "f2.csv", function_csv(parts->f2));
  report["decomposition"] = {
      {"lambda", parts->lambda},
      {"recombination_residual", recombination},
      {"fixed_point_residuals",
       {check_fixed_point(weight, parts->mu1, job.depth),
        check_fixed_point(weight, parts->mu2, job.depth)}},
      {"mu1", masses_json(mu1)},
      {"mu2", masses_json(mu2)}};
  emit_report(job, "ergodicity", report, out);
  return kNonExtremal;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateH:
      return kDegenerate;
    case ErrorCode::kZeroMassConditioning:
      return kSamplingDegenerate;
    case ErrorCode::kNoConvergence:
    case ErrorCode::kMonotonicityViolation:
      return kIdentityFailure;
    default:
      return kConfigError;
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transfer operators and quasi-invariant path measures on subshifts of finite type",
               "ruelle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RUELLE_VERSION);

  Flags flags;
  using Command = int (*)(const Job&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"invariant", "Strongly invariant reference measure as CSV", cmd_invariant},
      {"fixpoint", "h_V, nu_V and the fixed density measure", cmd_fixpoint},
      {"verify", "Residuals of every identity for the configured system", cmd_verify},
      {"sample", "Sample paths and compare frequencies with the marginals", cmd_sample},
      {"ergodicity", "Relative ergodicity test and decomposition", cmd_ergodicity},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "System/run config (JSON)")->required();
    flags.depth_opt = sub->add_option("--depth", flags.depth, "Cylinder depth (default 3)");
    flags.tol_opt = sub->add_option("--tol", flags.tol, "Residual tolerance (default 1e-10)");
    flags.max_iter_opt = sub->add_option("--max-iter", flags.max_iter, "Iteration cap (default 10000)");
    flags.samples_opt = sub->add_option("--samples", flags.samples, "Number of paths (default 100000)");
    flags.seed_opt = sub->add_option("--seed", flags.seed, "RNG seed (default 42)");
    flags.steps_opt = sub->add_option("--steps", flags.steps, "Path steps (default 3)");
    sub->add_option("--workers", flags.workers, "Sampling threads (output does not depend on it)");
    sub->add_option("--out", flags.out_dir, "Output directory (default .)");
    subs.emplace_back(sub, fn);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kConfigError;
  }

  Command command = nullptr;
  for (const auto& [sub, fn] : subs) {
    if (sub->parsed()) {
      command = fn;
      // Options of the chosen subcommand are the ones that were counted.
      flags.depth_opt = sub->get_option("--depth");
      flags.tol_opt = sub->get_option("--tol");
      flags.max_iter_opt = sub->get_option("--max-iter");
      flags.samples_opt = sub->get_option("--samples");
      flags.seed_opt = sub->get_option("--seed");
      flags.steps_opt = sub->get_option("--steps");
    }
  }

  try {
    const Job job = load_job(flags);
    fs::create_directories(job.out_dir);
    return command(job, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace ruelle::cli
