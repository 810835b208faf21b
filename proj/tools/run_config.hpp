#pragma once

// YAML run configuration for the rnewton driver.
//
// Every mapping is checked against the keys it may contain, and errors name
// the offending field together with its line in the file.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rnewton/rnewton.hpp"

namespace rnewton::cli {

struct InitConfig {
  enum class Kind { Explicit, RandomNormal, FunctionFit } kind = Kind::RandomNormal;
  std::vector<double> theta;
  double mean = 0.0;
  double stddev = 1.0;
  std::optional<std::uint64_t> seed;
  std::vector<CosineTarget> targets;
  std::size_t samples = 200;
  std::size_t max_iters = 50;
  double start_stddev = 3.0;
  double fit_rank_tol = 1e-4;
  std::string label;
};

struct ScheduleConfig {
  std::string parameter;
  std::vector<double> values;
  bool warm_start = true;
  double mean = 0.0;
  double stddev = 1.0;
};

/// Table-1 style list of (grid step, hidden width) cases, each repeated
/// with `repeats` consecutive seeds.
struct SweepCase {
  double grid_step = 0.01;
  std::size_t hidden_width = 1;
};

struct SweepConfig {
  std::vector<SweepCase> cases;
  std::size_t repeats = 1;
};

struct MultistartConfig {
  std::vector<InitConfig> inits;
  std::size_t runs_per_init = 1;
  double distance_threshold = 0.05;
  std::size_t points_per_axis = 101;
};

struct DiagnoseConfig {
  std::size_t rows = 6;
  std::size_t cols = 3;
  std::uint64_t seed = 0;
  double eta = 1.0;
  std::size_t monte_carlo_draws = 100000;
};

struct RunConfig {
  std::filesystem::path source;
  std::string problem_name;
  ProblemOptions problem_options;
  std::vector<std::pair<std::string, double>> problem_params;
  NetworkShape shape;
  Provenance sampling = UniformGrid{};
  std::optional<std::uint64_t> sampling_seed;
  SolverConfig solver;
  bool solver_seed_given = false;
  InitConfig init;
  std::optional<ScheduleConfig> schedule;
  std::optional<SweepConfig> sweep;
  std::optional<MultistartConfig> multistart;
  std::optional<DiagnoseConfig> diagnose;
  CollocationForm collocation_form = CollocationForm::Reduced;
  bool collocation_both = false;
  std::size_t output_points = 0;  // per axis, 0 picks a default by dimension
  std::uint64_t seed = 0;
  std::filesystem::path output = "out";

  /// Catalog problem with the configured parameter overrides applied.
  ProblemSpec problem() const {
    ProblemSpec p = make_problem(problem_name, problem_options);
    for (const auto& [k, v] : problem_params) p.params.set(k, v);
    return p;
  }

  std::uint64_t solver_seed() const { return solver_seed_given ? solver.seed : derive_seed(seed, 0); }
  std::uint64_t init_seed() const { return init.seed.value_or(derive_seed(seed, 1)); }
  std::uint64_t plan_seed() const { return sampling_seed.value_or(derive_seed(seed, 2)); }
};

namespace detail {

inline std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? "line " + std::to_string(m.line + 1) : "config";
}

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
  throw ConfigError(where(n) + ": field '" + field + "': " + msg);
}

inline void check_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(map, section, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, section.empty() ? key : section + "." + key, "unknown key");
  }
}

template <class T>
T get(const YAML::Node& map, const std::string& key, const std::string& section, T fallback) {
  const YAML::Node n = map[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, section.empty() ? key : section + "." + key, "has the wrong type");
  }
}

template <class T>
T require(const YAML::Node& map, const std::string& key, const std::string& section) {
  const YAML::Node n = map[key];
  const std::string field = section.empty() ? key : section + "." + key;
  if (!n) fail(map, field, "is required");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, field, "has the wrong type");
  }
}

inline StopNorm parse_norm(const YAML::Node& map, const std::string& key, StopNorm fallback) {
  const auto s = get<std::string>(map, key, "solver", std::string(to_string(fallback)));
  if (s == "subset") return StopNorm::Subset;
  if (s == "full") return StopNorm::Full;
  fail(map[key], "solver." + key, "must be 'subset' or 'full'");
}

inline InitConfig parse_init(const YAML::Node& n, const std::string& section) {
  check_keys(n, section,
             {"kind", "theta", "mean", "stddev", "seed", "targets", "samples", "max_iters", "start_stddev", "fit_rank_tol", "label"});
  InitConfig c;
  const auto kind = require<std::string>(n, "kind", section);
  if (kind == "explicit") {
    c.kind = InitConfig::Kind::Explicit;
    c.theta = require<std::vector<double>>(n, "theta", section);
  } else if (kind == "random_normal") {
    c.kind = InitConfig::Kind::RandomNormal;
  } else if (kind == "function_fit") {
    c.kind = InitConfig::Kind::FunctionFit;
    const YAML::Node targets = n["targets"];
    if (!targets || !targets.IsSequence() || targets.size() == 0) {
      fail(targets ? targets : n, section + ".targets", "needs one target per component");
    }
    for (const auto& t : targets) {
      check_keys(t, section + ".targets", {"offset", "amplitude", "wavenumbers"});
      CosineTarget ct;
      ct.offset = get<double>(t, "offset", section + ".targets", 0.0);
      ct.amplitude = get<double>(t, "amplitude", section + ".targets", 0.0);
      ct.wavenumbers = get<std::vector<double>>(t, "wavenumbers", section + ".targets", {});
      c.targets.push_back(ct);
    }
  } else {
    fail(n["kind"], section + ".kind", "must be explicit, random_normal or function_fit");
  }
  c.mean = get<double>(n, "mean", section, 0.0);
  c.stddev = get<double>(n, "stddev", section, 1.0);
  if (n["seed"]) c.seed = get<std::uint64_t>(n, "seed", section, 0);
  c.samples = get<std::size_t>(n, "samples", section, 200);
  c.max_iters = get<std::size_t>(n, "max_iters", section, 50);
  c.start_stddev = get<double>(n, "start_stddev", section, 3.0);
  c.fit_rank_tol = get<double>(n, "fit_rank_tol", section, 1e-4);
  c.label = get<std::string>(n, "label", section, kind);
  if (!(c.stddev >= 0.0)) fail(n, section + ".stddev", "must be non-negative");
  return c;
}

inline std::vector<double> parse_values(const YAML::Node& n, const std::string& section) {
  if (n.IsSequence()) return n.as<std::vector<double>>();
  check_keys(n, section, {"from", "to", "steps"});
  const auto from = require<double>(n, "from", section);
  const auto to = require<double>(n, "to", section);
  const auto steps = require<std::size_t>(n, "steps", section);
  if (steps < 1) fail(n, section + ".steps", "must be at least 1");
  std::vector<double> v;
  for (std::size_t i = 0; i <= steps; ++i) {
    v.push_back(from + (to - from) * static_cast<double>(i) / static_cast<double>(steps));
  }
  return v;
}

}  // namespace detail

inline RunConfig parse_config(const YAML::Node& root) {
  using namespace detail;
  check_keys(root, "", {"seed", "output", "problem", "network", "sampling", "solver", "init", "schedule", "sweep",
                        "multistart", "diagnose", "collocation", "output_points", "description"});
  RunConfig c;
  if (!root["seed"]) fail(root, "seed", "is required");
  c.seed = get<std::uint64_t>(root, "seed", "", 0);
  c.output = get<std::string>(root, "output", "", "out");
  c.output_points = get<std::size_t>(root, "output_points", "", 0);

  const YAML::Node prob = root["problem"];
  if (!prob) fail(root, "problem", "is required");
  check_keys(prob, "problem", {"name", "dim", "dirichlet_boundary", "params"});
  c.problem_name = require<std::string>(prob, "name", "problem");
  c.problem_options.dim = get<std::size_t>(prob, "dim", "problem", 0);
  c.problem_options.dirichlet_boundary = get<bool>(prob, "dirichlet_boundary", "problem", false);
  ProblemSpec spec;
  try {
    spec = make_problem(c.problem_name, c.problem_options);
  } catch (const ConfigError& e) {
    fail(prob["name"], "problem.name", e.what());
  }
  if (const YAML::Node params = prob["params"]) {
    if (!params.IsMap()) fail(params, "problem.params", "expected a mapping");
    for (const auto& kv : params) {
      const auto key = kv.first.as<std::string>();
      if (!spec.params.has(key)) fail(kv.first, "problem.params." + key, "is not a parameter of " + spec.name);
      c.problem_params.emplace_back(key, get<double>(params, key, "problem.params", 0.0));
    }
  }

  const YAML::Node net = root["network"];
  if (!net) fail(root, "network", "is required");
  check_keys(net, "network", {"widths", "activation"});
  c.shape.layer_widths = require<std::vector<std::size_t>>(net, "widths", "network");
  try {
    c.shape.activation = activation_from_string(get<std::string>(net, "activation", "network", "sin"));
  } catch (const Error& e) {
    fail(net["activation"], "network.activation", e.what());
  }
  c.shape.branches = spec.components;
  try {
    c.shape.validate();
  } catch (const Error& e) {
    fail(net, "network.widths", e.what());
  }
  if (c.shape.input_dim() != spec.spatial_dim) {
    fail(net["widths"], "network.widths", "input width must equal the spatial dimension " +
                                              std::to_string(spec.spatial_dim));
  }
  if (c.shape.layer_widths.back() != 1) fail(net["widths"], "network.widths", "output width must be 1");

  if (const YAML::Node s = root["sampling"]) {
    check_keys(s, "sampling", {"kind", "step", "count", "boundary_fraction", "points_per_parameter", "seed"});
    const auto kind = get<std::string>(s, "kind", "sampling", "grid");
    const auto frac = get<double>(s, "boundary_fraction", "sampling", 0.2);
    std::size_t count = get<std::size_t>(s, "count", "sampling", 0);
    if (s["points_per_parameter"]) count = get<std::size_t>(s, "points_per_parameter", "sampling", 10) * c.shape.size();
    if (kind == "grid") {
      c.sampling = UniformGrid{require<double>(s, "step", "sampling")};
    } else if (kind == "random") {
      if (count == 0) fail(s, "sampling.count", "is required for random sampling");
      c.sampling = RandomUniform{count, frac};
    } else if (kind == "ball") {
      if (count == 0) fail(s, "sampling.count", "is required for ball sampling");
      c.sampling = RandomBall{count, frac};
    } else {
      fail(s["kind"], "sampling.kind", "must be grid, random or ball");
    }
    if (s["seed"]) c.sampling_seed = get<std::uint64_t>(s, "seed", "sampling", 0);
  }

  if (const YAML::Node s = root["solver"]) {
    check_keys(s, "solver", {"stop_tol", "max_iters", "eta", "rank_tol", "resample_retries", "divergence_factor",
                             "seed", "stop_norm", "backtracking", "max_halvings", "line_search_norm", "max_step"});
    auto& v = c.solver;
    v.stop_tol = get<double>(s, "stop_tol", "solver", v.stop_tol);
    v.max_iters = get<std::size_t>(s, "max_iters", "solver", v.max_iters);
    v.eta = get<double>(s, "eta", "solver", v.eta);
    v.rank_tol = get<double>(s, "rank_tol", "solver", v.rank_tol);
    v.resample_retries = get<std::size_t>(s, "resample_retries", "solver", v.resample_retries);
    v.divergence_factor = get<double>(s, "divergence_factor", "solver", v.divergence_factor);
    v.stop_norm = parse_norm(s, "stop_norm", v.stop_norm);
    v.backtracking = get<bool>(s, "backtracking", "solver", v.backtracking);
    v.max_halvings = get<std::size_t>(s, "max_halvings", "solver", v.max_halvings);
    v.line_search_norm = parse_norm(s, "line_search_norm", v.line_search_norm);
    v.max_step = get<double>(s, "max_step", "solver", v.max_step);
    if (s["seed"]) {
      v.seed = get<std::uint64_t>(s, "seed", "solver", 0);
      c.solver_seed_given = true;
    }
    try {
      v.validate();
    } catch (const ConfigError& e) {
      fail(s, "solver", e.what());
    }
  }

  if (const YAML::Node n = root["init"]) c.init = parse_init(n, "init");

  if (const YAML::Node s = root["schedule"]) {
    check_keys(s, "schedule", {"parameter", "values", "policy", "mean", "stddev"});
    ScheduleConfig sc;
    sc.parameter = get<std::string>(s, "parameter", "schedule", spec.continuation_parameter);
    if (sc.parameter.empty() || !spec.params.has(sc.parameter)) {
      fail(s, "schedule.parameter", "'" + sc.parameter + "' is not a parameter of " + spec.name);
    }
    if (!s["values"]) fail(s, "schedule.values", "is required");
    sc.values = parse_values(s["values"], "schedule.values");
    if (sc.values.empty()) fail(s["values"], "schedule.values", "must not be empty");
    const auto policy = get<std::string>(s, "policy", "schedule", "warm_start");
    if (policy != "warm_start" && policy != "random_restart") {
      fail(s["policy"], "schedule.policy", "must be warm_start or random_restart");
    }
    sc.warm_start = policy == "warm_start";
    sc.mean = get<double>(s, "mean", "schedule", 0.0);
    sc.stddev = get<double>(s, "stddev", "schedule", 1.0);
    c.schedule = sc;
  }

  if (const YAML::Node s = root["sweep"]) {
    check_keys(s, "sweep", {"cases", "repeats"});
    SweepConfig sw;
    const YAML::Node cases = s["cases"];
    if (!cases || !cases.IsSequence() || cases.size() == 0) fail(s, "sweep.cases", "needs at least one case");
    for (const auto& cs : cases) {
      check_keys(cs, "sweep.cases", {"grid_step", "hidden_width"});
      sw.cases.push_back({require<double>(cs, "grid_step", "sweep.cases"),
                          require<std::size_t>(cs, "hidden_width", "sweep.cases")});
    }
    sw.repeats = get<std::size_t>(s, "repeats", "sweep", 1);
    if (c.shape.layers() != 2) fail(s, "sweep", "needs a one-hidden-layer network");
    if (sw.repeats == 0) fail(s, "sweep.repeats", "must be at least 1");
    c.sweep = sw;
  }

  if (const YAML::Node s = root["multistart"]) {
    check_keys(s, "multistart", {"inits", "runs_per_init", "distance_threshold", "points_per_axis"});
    MultistartConfig ms;
    if (const YAML::Node inits = s["inits"]) {
      if (!inits.IsSequence()) fail(inits, "multistart.inits", "expected a list");
      for (std::size_t i = 0; i < inits.size(); ++i) {
        ms.inits.push_back(parse_init(inits[i], "multistart.inits[" + std::to_string(i) + "]"));
      }
    } else {
      ms.inits.push_back(c.init);
    }
    ms.runs_per_init = get<std::size_t>(s, "runs_per_init", "multistart", 1);
    ms.distance_threshold = get<double>(s, "distance_threshold", "multistart", 0.05);
    ms.points_per_axis = get<std::size_t>(s, "points_per_axis", "multistart", 101);
    if (ms.runs_per_init == 0) fail(s, "multistart.runs_per_init", "must be at least 1");
    c.multistart = ms;
  }

  if (const YAML::Node s = root["diagnose"]) {
    check_keys(s, "diagnose", {"rows", "cols", "seed", "eta", "monte_carlo_draws"});
    DiagnoseConfig d;
    d.rows = get<std::size_t>(s, "rows", "diagnose", 6);
    d.cols = get<std::size_t>(s, "cols", "diagnose", 3);
    d.seed = get<std::uint64_t>(s, "seed", "diagnose", 0);
    d.eta = get<double>(s, "eta", "diagnose", 1.0);
    d.monte_carlo_draws = get<std::size_t>(s, "monte_carlo_draws", "diagnose", 100000);
    if (d.cols == 0 || d.rows <= d.cols) fail(s, "diagnose", "needs rows > cols >= 1");
    c.diagnose = d;
  }

  if (const YAML::Node s = root["collocation"]) {
    check_keys(s, "collocation", {"form"});
    const auto form = get<std::string>(s, "form", "collocation", "reduced");
    if (form == "reduced") {
      c.collocation_form = CollocationForm::Reduced;
    } else if (form == "full") {
      c.collocation_form = CollocationForm::Full;
    } else if (form == "both") {
      c.collocation_both = true;
    } else {
      fail(s["form"], "collocation.form", "must be reduced, full or both");
    }
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config file '" + path.string() + "'");
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  RunConfig c = parse_config(root);
  c.source = path;
  return c;
}

/// Library init spec for run `k` of a batch (seeds shift with k).
inline InitSpec make_init(const InitConfig& ic, const RunConfig& rc, const ProblemSpec& problem, std::uint64_t seed) {
  switch (ic.kind) {
    case InitConfig::Kind::Explicit:
      return ExplicitInit{ic.theta};
    case InitConfig::Kind::RandomNormal:
      return RandomNormalInit{ic.mean, ic.stddev, seed};
    case InitConfig::Kind::FunctionFit: {
      FunctionFitInit f;
      for (const auto& t : ic.targets) f.targets.emplace_back(t);
      const auto* box = std::get_if<BoxDomain>(&problem.domain);
      if (!box) throw ConfigError("function_fit initialization needs a box domain");
      f.domain = *box;
      f.samples = ic.samples;
      f.max_iters = ic.max_iters;
      f.seed = seed;
      f.start_stddev = ic.start_stddev;
      f.rank_tol = ic.fit_rank_tol;
      f.description = ic.label;
      (void)rc;
      return f;
    }
  }
  throw ConfigError("unknown init kind");
}

}  // namespace rnewton::cli
