#pragma once

// Subcommands of the rnewton driver. Each returns the process exit status:
// 0 when the run converged, 2 when it did not, and errors propagate as
// exceptions (the caller maps ConfigError to 1).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "run_config.hpp"

namespace rnewton::cli {

struct RunOptions {
  bool quiet = false;
  unsigned jobs = 1;
};

/// Timestamped progress log. Timestamps only ever go to run.log so the
/// other outputs stay byte-identical across reruns.
class RunLog {
 public:
  RunLog(const std::filesystem::path& path, bool quiet) : file_(path), quiet_(quiet) {
    if (!file_) throw ConfigError("cannot write '" + path.string() + "'");
  }
  void operator()(const std::string& msg) {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    file_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " " << msg << "\n";
    file_.flush();
    if (!quiet_) std::cout << msg << std::endl;
  }

 private:
  std::ofstream file_;
  bool quiet_;
  std::mutex mutex_;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + (dir / name).string() + "'");
  return os;
}

/// Points at which solution.csv samples the networks. Balls of dimension
/// above two are sampled on the (x0, x1) plane through the origin.
inline std::vector<DenseVector> output_grid(const ProblemSpec& p, std::size_t per_axis) {
  std::vector<DenseVector> pts;
  if (const auto* box = std::get_if<BoxDomain>(&p.domain)) {
    const std::size_t d = box->lo.size();
    if (per_axis == 0) per_axis = d == 1 ? 201 : 51;
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      DenseVector x(static_cast<Eigen::Index>(d));
      for (std::size_t k = 0; k < d; ++k) {
        x(static_cast<Eigen::Index>(k)) =
            box->lo[k] + (box->hi[k] - box->lo[k]) * static_cast<double>(idx[k]) / static_cast<double>(per_axis - 1);
      }
      pts.push_back(std::move(x));
      std::size_t k = d;
      while (k > 0 && ++idx[k - 1] == per_axis) idx[--k] = 0;
      if (k == 0) break;
    }
    return pts;
  }
  const std::size_t n = domain_dim(p.domain);
  if (per_axis == 0) per_axis = 41;
  for (std::size_t i = 0; i < per_axis; ++i) {
    for (std::size_t j = 0; j < per_axis; ++j) {
      const double a = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(per_axis - 1);
      const double b = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(per_axis - 1);
      if (a * a + b * b > 1.0 + 1e-12) continue;
      DenseVector x = DenseVector::Zero(static_cast<Eigen::Index>(n));
      x(0) = a;
      x(1) = b;
      pts.push_back(std::move(x));
    }
  }
  return pts;
}

inline std::vector<std::string> component_names(const ProblemSpec& p) {
  if (p.components == 1) return {"u"};
  std::vector<std::string> out;
  for (std::size_t c = 0; c < p.components; ++c) out.push_back("u" + std::to_string(c));
  return out;
}

struct Column {
  std::string name;
  std::function<double(const DenseVector&)> value;
};

inline std::vector<Column> network_columns(const NetworkParams& net, const ProblemSpec& p, const std::string& prefix) {
  std::vector<Column> cols;
  const auto names = component_names(p);
  for (std::size_t c = 0; c < p.components; ++c) {
    cols.push_back({prefix + names[c], [net, c](const DenseVector& x) { return evaluate(net, x)(static_cast<Eigen::Index>(c)); }});
  }
  return cols;
}

inline void write_solution_csv(std::ostream& os, const std::vector<DenseVector>& pts,
                               const std::vector<Column>& cols) {
  if (pts.empty()) return;
  const auto d = pts.front().size();
  for (Eigen::Index k = 0; k < d; ++k) os << (k ? "," : "") << "x" << k;
  for (const auto& c : cols) os << "," << c.name;
  os << "\n";
  for (const auto& x : pts) {
    for (Eigen::Index k = 0; k < d; ++k) os << (k ? "," : "") << format_double(x(k));
    for (const auto& c : cols) os << "," << format_double(c.value(x));
    os << "\n";
  }
}

inline std::string_view sampling_kind(const Provenance& p) {
  if (std::holds_alternative<UniformGrid>(p)) return "grid";
  if (std::holds_alternative<RandomUniform>(p)) return "random";
  return "ball";
}

inline void write_problem(JsonWriter& w, const ProblemSpec& p, const Parameters& params) {
  w.key("problem").begin_object();
  w.key("name").value(p.name);
  w.key("spatial_dim").value(static_cast<std::uint64_t>(p.spatial_dim));
  w.key("components").value(static_cast<std::uint64_t>(p.components));
  w.key("params").begin_object();
  for (const auto& [k, v] : params.all()) w.key(k).value(v);
  w.end_object();
  w.end_object();
}

inline void write_network(JsonWriter& w, const NetworkShape& s) {
  w.key("network").begin_object();
  w.key("layer_widths").numbers(s.layer_widths);
  w.key("activation").value(to_string(s.activation));
  w.key("branches").value(static_cast<std::uint64_t>(s.branches));
  w.key("parameters").value(static_cast<std::uint64_t>(s.size()));
  w.end_object();
}

inline void write_sampling(JsonWriter& w, const SamplePlan& plan, std::size_t rows) {
  w.key("sampling").begin_object();
  w.key("kind").value(sampling_kind(plan.provenance));
  if (const auto* g = std::get_if<UniformGrid>(&plan.provenance)) w.key("step").value(g->step);
  w.key("interior_points").value(static_cast<std::uint64_t>(plan.interior.size()));
  w.key("boundary_points").value(static_cast<std::uint64_t>(plan.boundary.size()));
  w.key("rows").value(static_cast<std::uint64_t>(rows));
  w.key("seed").value(plan.seed);
  w.end_object();
}

inline void write_solver(JsonWriter& w, const SolverConfig& c) {
  w.key("solver").begin_object();
  w.key("stop_tol").value(c.stop_tol);
  w.key("stop_norm").value(to_string(c.stop_norm));
  w.key("max_iters").value(static_cast<std::uint64_t>(c.max_iters));
  w.key("eta").value(c.eta);
  w.key("rank_tol").value(c.rank_tol);
  w.key("resample_retries").value(static_cast<std::uint64_t>(c.resample_retries));
  w.key("divergence_factor").value(c.divergence_factor);
  w.key("backtracking").value(c.backtracking);
  w.key("max_halvings").value(static_cast<std::uint64_t>(c.max_halvings));
  w.key("line_search_norm").value(to_string(c.line_search_norm));
  w.key("max_step").value(c.max_step);
  w.end_object();
}

/// Everything one solve produces, computed off the writer thread.
struct RunResult {
  std::string label;
  std::string init;
  std::optional<NetworkParams> net;
  SolveReport report;
  std::optional<double> error;
  std::optional<double> u_at_origin;
  std::size_t sample_points = 0;
  std::string failure;  // set when the run threw
};

inline std::optional<double> try_error(const NetworkParams& net, const ProblemSpec& p, const Parameters& params) {
  if (p.reference.kind == ReferenceKind::None || !net.theta.allFinite()) return std::nullopt;
  try {
    return reference_error(net, p, params);
  } catch (const NoReference&) {
    return std::nullopt;
  }
}

inline RunResult run_one(const ProblemSpec& problem, const NetworkShape& shape, const SamplePlan& plan,
                         const InitSpec& init, SolverConfig cfg, std::string label) {
  RunResult r;
  r.label = std::move(label);
  r.init = describe(init);
  r.sample_points = plan.points();
  ResidualSystem sys(problem, shape, plan);
  const NetworkParams start = initialize(init, shape);
  r.report = solve(sys, start.theta, cfg);
  if (r.report.final_theta.allFinite()) {
    r.net = sys.network(r.report.final_theta);
    r.error = try_error(*r.net, problem, sys.params());
    if (problem.reference.kind == ReferenceKind::ShootingOracle) {
      r.u_at_origin = evaluate(*r.net, std::vector<double>(problem.spatial_dim, 0.0))(0);
    }
  }
  return r;
}

inline void write_run(JsonWriter& w, const RunResult& r) {
  w.begin_object();
  w.key("label").value(r.label);
  w.key("init").value(r.init);
  w.key("sample_points").value(static_cast<std::uint64_t>(r.sample_points));
  if (!r.failure.empty()) w.key("failure").value(r.failure);
  w.key("reference_error");
  r.error ? w.value(*r.error) : w.null();
  if (r.u_at_origin) w.key("u_at_origin").value(*r.u_at_origin);
  write_report_fields(w, r.report);
  w.end_object();
}

/// Runs `count` independent jobs on up to `jobs` worker threads. Results
/// land in their own slots so output order never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

inline void write_checkpoints(const std::filesystem::path& dir, const std::vector<RunResult>& runs) {
  auto os = open_output(dir, "checkpoint.json");
  if (runs.size() == 1 && runs.front().net) {
    write_checkpoint(os, *runs.front().net);
    return;
  }
  JsonWriter w(os);
  w.begin_object();
  w.key("runs").begin_array();
  for (const auto& r : runs) {
    w.begin_object();
    w.key("label").value(r.label);
    if (r.net) {
      w.key("layer_widths").numbers(r.net->shape.layer_widths);
      w.key("activation").value(to_string(r.net->shape.activation));
      w.key("branches").value(static_cast<std::uint64_t>(r.net->shape.branches));
      w.key("theta").vector(r.net->theta);
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.finish();
}

inline std::vector<Column> run_columns(const std::vector<RunResult>& runs, const ProblemSpec& p) {
  std::vector<Column> cols;
  for (const auto& r : runs) {
    if (!r.net) continue;
    auto c = network_columns(*r.net, p, runs.size() == 1 ? "" : r.label + ":");
    cols.insert(cols.end(), c.begin(), c.end());
  }
  return cols;
}

inline void log_run(RunLog& log, const RunResult& r) {
  std::ostringstream os;
  os.precision(6);
  os << r.label << ": " << to_string(r.report.termination) << " after " << r.report.iterations
     << " iterations, full norm " << r.report.final_full_norm;
  if (r.error) os << ", L2 error " << *r.error;
  if (!r.failure.empty()) os << " (" << r.failure << ")";
  log(os.str());
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_solve(const RunConfig& c, const RunOptions& opt, RunLog& log) {
  const ProblemSpec problem = c.problem();
  struct Job {
    NetworkShape shape;
    Provenance sampling;
    std::string label;
    std::uint64_t index;
  };
  std::vector<Job> jobs;
  if (c.sweep) {
    std::uint64_t k = 0;
    for (const auto& cs : c.sweep->cases) {
      NetworkShape s = c.shape;
      s.layer_widths[1] = cs.hidden_width;
      for (std::size_t rep = 0; rep < c.sweep->repeats; ++rep, ++k) {
        std::ostringstream label;
        label << "step=" << format_double(cs.grid_step) << ",nodes=" << cs.hidden_width << ",repeat=" << rep;
        jobs.push_back({s, UniformGrid{cs.grid_step}, label.str(), k});
      }
    }
  } else {
    jobs.push_back({c.shape, c.sampling, "run", 0});
  }
  log("solve: " + problem.name + ", " + std::to_string(jobs.size()) + " run(s)");
  std::vector<detail::RunResult> results(jobs.size());
  std::vector<SamplePlan> plans;
  for (const auto& j : jobs) plans.push_back(build_plan(problem, j.sampling, c.plan_seed(), j.shape.size()));
  detail::parallel_for(jobs.size(), opt.jobs, [&](std::size_t i) {
    const auto& j = jobs[i];
    SolverConfig cfg = c.solver;
    cfg.seed = jobs.size() == 1 ? c.solver_seed() : derive_seed(c.solver_seed(), j.index);
    const std::uint64_t init_seed = jobs.size() == 1 ? c.init_seed() : derive_seed(c.init_seed(), j.index);
    try {
      results[i] = detail::run_one(problem, j.shape, plans[i], make_init(c.init, c, problem, init_seed), cfg, j.label);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      results[i].label = j.label;
      results[i].failure = e.what();
    }
  });

  auto report = detail::open_output(c.output, "report.json");
  JsonWriter w(report);
  w.begin_object();
  w.key("command").value("solve");
  w.key("seed").value(c.seed);
  detail::write_problem(w, problem, problem.params);
  detail::write_network(w, c.shape);
  detail::write_sampling(w, plans.front(), plans.front().points() * problem.components);
  detail::write_solver(w, c.solver);
  if (problem.reference.kind == ReferenceKind::ShootingOracle) {
    w.key("oracle_roots").numbers(shooting_roots(problem.params.get("lambda"),
                                                 static_cast<int>(std::lround(problem.params.get("p")))));
  }
  w.key("runs").begin_array();
  for (const auto& r : results) detail::write_run(w, r);
  w.end_array();
  w.end_object();
  w.finish();

  std::vector<TableRow> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    rows.push_back({r.sample_points, jobs[i].shape.layer_widths[1], jobs[i].shape.size(), r.report.iterations,
                    r.error.value_or(std::numeric_limits<double>::quiet_NaN()), r.report.converged});
  }
  auto table = detail::open_output(c.output, "table.csv");
  write_table_csv(table, aggregate_table(rows));

  auto sol = detail::open_output(c.output, "solution.csv");
  detail::write_solution_csv(sol, detail::output_grid(problem, c.output_points), detail::run_columns(results, problem));
  detail::write_checkpoints(c.output, results);
  if (results.size() == 1) {
    auto hist = detail::open_output(c.output, "history.csv");
    write_history_csv(hist, results.front().report);
  }

  bool all = true;
  for (const auto& r : results) {
    detail::log_run(log, r);
    all = all && r.report.converged;
  }
  return all ? 0 : 2;
}

inline int cmd_track(const RunConfig& c, const RunOptions&, RunLog& log) {
  if (!c.schedule) throw ConfigError("track needs a 'schedule' section");
  const ProblemSpec problem = c.problem();
  const SamplePlan plan = build_plan(problem, c.sampling, c.plan_seed(), c.shape.size());
  TrackSchedule schedule;
  schedule.parameter = c.schedule->parameter;
  schedule.values = c.schedule->values;
  if (c.schedule->warm_start) {
    schedule.policy = WarmStart{};
  } else {
    schedule.policy = RandomRestart{c.init_seed(), c.schedule->mean, c.schedule->stddev};
  }
  SolverConfig cfg = c.solver;
  cfg.seed = c.solver_seed();
  log("track: " + problem.name + " over " + std::to_string(schedule.values.size()) + " values of " +
      schedule.parameter);
  const TrackReport tr = track(problem, schedule, c.shape, plan, make_init(c.init, c, problem, c.init_seed()), cfg);
  const bool shocks = problem.reference.kind == ReferenceKind::EntropyProfile;
  const auto* box = std::get_if<BoxDomain>(&problem.domain);

  std::vector<std::optional<double>> shock(tr.entries.size());
  for (std::size_t k = 0; k < tr.entries.size(); ++k) {
    const auto& e = tr.entries[k];
    if (shocks && box && e.report.final_theta.allFinite()) {
      try {
        shock[k] = shock_location(NetworkParams(c.shape, e.report.final_theta), *box);
      } catch (const NoShock&) {
      }
    }
  }

  auto report = detail::open_output(c.output, "report.json");
  JsonWriter w(report);
  w.begin_object();
  w.key("command").value("track");
  w.key("seed").value(c.seed);
  detail::write_problem(w, problem, problem.params);
  detail::write_network(w, c.shape);
  detail::write_sampling(w, plan, plan.points() * problem.components);
  detail::write_solver(w, c.solver);
  w.key("parameter").value(tr.parameter);
  w.key("policy").value(c.schedule->warm_start ? "warm_start" : "random_restart");
  w.key("entries").begin_array();
  for (std::size_t k = 0; k < tr.entries.size(); ++k) {
    const auto& e = tr.entries[k];
    w.begin_object();
    w.key("value").value(e.value);
    w.key("ill_conditioned").value(e.ill_conditioned);
    w.key("reference_error");
    e.error ? w.value(*e.error) : w.null();
    w.key("shock_location");
    shock[k] ? w.value(*shock[k]) : w.null();
    w.key("start_theta").vector(e.start_theta);
    write_report_fields(w, e.report);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.finish();

  auto table = detail::open_output(c.output, "table.csv");
  table << tr.parameter
        << ",iterations,converged,final_subset_norm,final_full_norm,final_condition,ill_conditioned,error,"
           "shock_location\n";
  for (std::size_t k = 0; k < tr.entries.size(); ++k) {
    const auto& e = tr.entries[k];
    table << format_double(e.value) << "," << e.report.iterations << "," << (e.report.converged ? "true" : "false")
          << "," << format_double(e.report.final_subset_norm) << "," << format_double(e.report.final_full_norm) << ","
          << format_double(e.report.final_condition) << "," << (e.ill_conditioned ? "true" : "false") << ","
          << (e.error ? format_double(*e.error) : "") << "," << (shock[k] ? format_double(*shock[k]) : "") << "\n";
  }

  std::vector<detail::RunResult> results;
  for (const auto& e : tr.entries) {
    detail::RunResult r;
    r.label = tr.parameter + "=" + format_double(e.value);
    r.report = e.report;
    r.error = e.error;
    if (e.report.final_theta.allFinite()) r.net = NetworkParams(c.shape, e.report.final_theta);
    results.push_back(std::move(r));
  }
  auto sol = detail::open_output(c.output, "solution.csv");
  detail::write_solution_csv(sol, detail::output_grid(problem, c.output_points), detail::run_columns(results, problem));
  detail::write_checkpoints(c.output, results);

  bool all = true;
  for (const auto& r : results) {
    detail::log_run(log, r);
    all = all && r.report.converged;
  }
  return all ? 0 : 2;
}

/// Greedy clustering: a converged run joins the first representative within
/// `threshold`, otherwise it founds a new pattern.
inline std::vector<int> cluster_patterns(const std::vector<detail::RunResult>& runs, const BoxDomain& box,
                                         double threshold, std::size_t points_per_axis,
                                         std::vector<std::size_t>& representatives) {
  std::vector<int> cluster(runs.size(), -1);
  representatives.clear();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].report.converged || !runs[i].net) continue;
    for (std::size_t k = 0; k < representatives.size(); ++k) {
      if (pattern_distance(*runs[i].net, *runs[representatives[k]].net, box, points_per_axis) <= threshold) {
        cluster[i] = static_cast<int>(k);
        break;
      }
    }
    if (cluster[i] < 0) {
      cluster[i] = static_cast<int>(representatives.size());
      representatives.push_back(i);
    }
  }
  return cluster;
}

inline int cmd_multistart(const RunConfig& c, const RunOptions& opt, RunLog& log) {
  if (!c.multistart) throw ConfigError("multistart needs a 'multistart' section");
  const auto& ms = *c.multistart;
  const ProblemSpec problem = c.problem();
  const auto* box = std::get_if<BoxDomain>(&problem.domain);
  if (!box) throw ConfigError("multistart clustering needs a box domain");
  const SamplePlan plan = build_plan(problem, c.sampling, c.plan_seed(), c.shape.size());
  const std::size_t total = ms.inits.size() * ms.runs_per_init;
  log("multistart: " + problem.name + ", " + std::to_string(total) + " runs");

  std::vector<detail::RunResult> results(total);
  detail::parallel_for(total, opt.jobs, [&](std::size_t k) {
    const auto& ic = ms.inits[k / ms.runs_per_init];
    const std::size_t rep = k % ms.runs_per_init;
    SolverConfig cfg = c.solver;
    cfg.seed = derive_seed(c.solver_seed(), k);
    // Function fits share one start per init so that repeats differ only
    // in the subsets drawn; random draws get a fresh seed per run.
    const std::uint64_t init_seed = ic.seed.value_or(ic.kind == InitConfig::Kind::RandomNormal
                                                         ? derive_seed(c.init_seed(), k)
                                                         : derive_seed(c.init_seed(), k / ms.runs_per_init));
    const std::string label = ic.label + "#" + std::to_string(rep);
    try {
      results[k] = detail::run_one(problem, c.shape, plan, make_init(ic, c, problem, init_seed), cfg, label);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      results[k].label = label;
      results[k].failure = e.what();
    }
  });

  std::vector<std::size_t> reps;
  const auto cluster = cluster_patterns(results, *box, ms.distance_threshold, ms.points_per_axis, reps);

  auto report = detail::open_output(c.output, "report.json");
  JsonWriter w(report);
  w.begin_object();
  w.key("command").value("multistart");
  w.key("seed").value(c.seed);
  detail::write_problem(w, problem, problem.params);
  detail::write_network(w, c.shape);
  detail::write_sampling(w, plan, plan.points() * problem.components);
  detail::write_solver(w, c.solver);
  w.key("distance_threshold").value(ms.distance_threshold);
  w.key("distinct_patterns").value(static_cast<std::uint64_t>(reps.size()));
  w.key("representatives").numbers(reps);
  w.key("pairwise_distance").begin_array();
  for (auto a : reps) {
    std::vector<double> row;
    for (auto b : reps) row.push_back(pattern_distance(*results[a].net, *results[b].net, *box, ms.points_per_axis));
    w.numbers(row);
  }
  w.end_array();
  w.key("runs").begin_array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    detail::write_run(w, results[k]);
  }
  w.end_array();
  w.key("clusters").numbers(cluster);
  w.end_object();
  w.finish();

  auto table = detail::open_output(c.output, "table.csv");
  table << "run,label,converged,iterations,final_subset_norm,final_full_norm,cluster\n";
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    table << k << "," << r.label << "," << (r.report.converged ? "true" : "false") << "," << r.report.iterations << ","
          << format_double(r.report.final_subset_norm) << "," << format_double(r.report.final_full_norm) << ","
          << cluster[k] << "\n";
  }
  std::vector<detail::RunResult> patterns;
  for (auto i : reps) {
    patterns.push_back(results[i]);
    patterns.back().label = "pattern" + std::to_string(patterns.size() - 1);
  }
  auto sol = detail::open_output(c.output, "solution.csv");
  detail::write_solution_csv(sol, detail::output_grid(problem, c.output_points),
                             detail::run_columns(patterns, problem));
  detail::write_checkpoints(c.output, results);

  for (const auto& r : results) detail::log_run(log, r);
  log(std::to_string(reps.size()) + " distinct pattern(s)");
  return reps.empty() ? 2 : 0;
}

inline int cmd_demo_collocation(const RunConfig& c, const RunOptions&, RunLog& log) {
  std::vector<std::pair<std::string, std::vector<CollocationRow>>> forms;
  if (c.collocation_both || c.collocation_form == CollocationForm::Reduced) {
    forms.emplace_back("reduced", collocation_failure_demo(CollocationForm::Reduced));
  }
  if (c.collocation_both || c.collocation_form == CollocationForm::Full) {
    forms.emplace_back("full", collocation_failure_demo(CollocationForm::Full));
  }
  auto report = detail::open_output(c.output, "report.json");
  JsonWriter w(report);
  w.begin_object();
  w.key("command").value("demo-collocation");
  w.key("initial_guess").numbers(std::vector<double>{1.0, 1.0});
  w.key("forms").begin_array();
  for (const auto& [name, rows] : forms) {
    w.begin_object();
    w.key("form").value(name);
    w.key("rows").begin_array();
    for (const auto& r : rows) {
      w.begin_object();
      w.key("label").value(r.label);
      w.key("points").numbers(std::vector<double>{r.x1, r.x2});
      w.key("converged").value(r.converged);
      w.key("iterations").value(static_cast<std::uint64_t>(r.iterations));
      w.key("theta").numbers(std::vector<double>{r.w1, r.b1, r.w2, r.b2});
      w.key("residual").value(r.residual);
      w.key("l2_error").value(r.l2_error);
      w.key("fake").value(r.l2_error > 0.1);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.finish();

  auto table = detail::open_output(c.output, "table.csv");
  table << "form,label,x1,x2,converged,iterations,w1,b1,w2,b2,residual,l2_error\n";
  bool all = true;
  std::vector<detail::Column> cols;
  for (const auto& [name, rows] : forms) {
    for (const auto& r : rows) {
      table << name << "," << r.label << "," << format_double(r.x1) << "," << format_double(r.x2) << ","
            << (r.converged ? "true" : "false") << "," << r.iterations << "," << format_double(r.w1) << ","
            << format_double(r.b1) << "," << format_double(r.w2) << "," << format_double(r.b2) << ","
            << format_double(r.residual) << "," << format_double(r.l2_error) << "\n";
      all = all && r.converged;
      cols.push_back({name + ":" + r.label, [r](const DenseVector& x) { return r.w2 * std::sin(r.w1 * x(0) + r.b1) + r.b2; }});
      std::ostringstream os;
      os.precision(10);
      os << name << " " << r.label << ": W1=" << r.w1 << " b1=" << r.b1 << " L2 error " << r.l2_error;
      log(os.str());
    }
  }
  auto sol = detail::open_output(c.output, "solution.csv");
  detail::write_solution_csv(sol, detail::output_grid(make_problem("poisson1d"), c.output_points), cols);
  return all ? 0 : 2;
}

inline int cmd_diagnose(const RunConfig& c, const RunOptions&, RunLog& log) {
  if (!c.diagnose) throw ConfigError("diagnose needs a 'diagnose' section");
  const auto& d = *c.diagnose;
  std::mt19937_64 rng(d.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(d.rows), m = static_cast<Eigen::Index>(d.cols);
  DenseMatrix a(n, m);
  DenseVector b(n), theta(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = g(rng);
  }
  for (Eigen::Index i = 0; i < n; ++i) b(i) = g(rng);
  for (Eigen::Index j = 0; j < m; ++j) theta(j) = g(rng);
  AffineSystem sys(a, b);
  const auto exp = expectation_diagnostic(sys, theta);
  const DenseMatrix sigma = covariance_diagnostic(sys, theta, d.eta);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (sigma + sigma.transpose()));

  // Monte Carlo mean of the subset step with its standard error.
  Rng mc(derive_seed(d.seed, 1));
  const auto [f, jac] = rnewton::detail::full_system(sys, theta);
  DenseVector mean = DenseVector::Zero(m), sq = DenseVector::Zero(m);
  for (std::size_t k = 0; k < d.monte_carlo_draws; ++k) {
    const auto s = draw_subset(d.rows, d.cols, mc);
    const DenseVector step = subset_newton_direction(jac, f, s.indices, kDefaultTruncTol);
    mean += step;
    sq += step.cwiseProduct(step);
  }
  const double draws = static_cast<double>(d.monte_carlo_draws);
  mean /= draws;
  const DenseVector var = (sq / draws - mean.cwiseProduct(mean)).cwiseMax(0.0);
  const DenseVector stderr_ = (var / draws).cwiseSqrt();

  auto report = detail::open_output(c.output, "report.json");
  JsonWriter w(report);
  w.begin_object();
  w.key("command").value("diagnose");
  w.key("system").begin_object();
  w.key("rows").value(static_cast<std::uint64_t>(d.rows));
  w.key("cols").value(static_cast<std::uint64_t>(d.cols));
  w.key("seed").value(d.seed);
  w.key("theta").vector(theta);
  w.end_object();
  w.key("pseudoinverse_step").vector(exp.lhs);
  w.key("mean_subset_step").vector(exp.rhs);
  w.key("discrepancy").value(exp.discrepancy);
  w.key("subsets").value(static_cast<std::uint64_t>(exp.subsets));
  w.key("monte_carlo_draws").value(static_cast<std::uint64_t>(d.monte_carlo_draws));
  w.key("monte_carlo_mean").vector(mean);
  w.key("monte_carlo_stderr").vector(stderr_);
  w.key("eta").value(d.eta);
  w.key("sigma").begin_array();
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) w.vector(sigma.row(i).transpose());
  w.end_array();
  w.key("sigma_asymmetry").value((sigma - sigma.transpose()).cwiseAbs().maxCoeff());
  w.key("sigma_eigenvalues").vector(eig.eigenvalues());
  w.end_object();
  w.finish();

  auto table = detail::open_output(c.output, "table.csv");
  table << "component,pseudoinverse_step,mean_subset_step,monte_carlo_mean,monte_carlo_stderr\n";
  for (Eigen::Index j = 0; j < m; ++j) {
    table << j << "," << format_double(exp.lhs(j)) << "," << format_double(exp.rhs(j)) << ","
          << format_double(mean(j)) << "," << format_double(stderr_(j)) << "\n";
  }
  std::ostringstream os;
  os << "diagnose: " << exp.subsets << " subsets, relative discrepancy " << exp.discrepancy;
  log(os.str());
  return 0;
}

inline int cmd_reference(const RunConfig& c, const RunOptions&, RunLog& log) {
  const ProblemSpec problem = c.problem();
  const auto pts = detail::output_grid(problem, c.output_points);
  std::vector<detail::Column> cols;
  std::vector<double> roots;
  switch (problem.reference.kind) {
    case ReferenceKind::None:
      throw NoReference("problem '" + problem.name + "' has no reference solution");
    case ReferenceKind::ShootingOracle: {
      const double lambda = problem.params.get("lambda");
      const int p = static_cast<int>(std::lround(problem.params.get("p")));
      roots = shooting_roots(lambda, p);
      if (roots.empty()) throw NoReference("no solution exists for this lambda");
      const std::size_t n = 1000;
      for (std::size_t k = 0; k < roots.size(); ++k) {
        const auto profile = bratu_profile(roots[k], lambda, p, n);
        cols.push_back({"u_root" + std::to_string(k), [profile, n](const DenseVector& x) {
                          // Linear interpolation on the RK4 grid.
                          const double t = std::clamp(x(0), 0.0, 1.0) * static_cast<double>(n);
                          const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), n - 1);
                          const double f = t - static_cast<double>(i);
                          return (1.0 - f) * profile[i] + f * profile[i + 1];
                        }});
      }
      break;
    }
    default: {
      const auto& fields = problem.reference.fields;
      const Parameters params = problem.params;
      cols.push_back({"u", [fields, params](const DenseVector& x) {
                        return fields(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), params)
                            .value.front();
                      }});
    }
  }
  auto sol = detail::open_output(c.output, "solution.csv");
  detail::write_solution_csv(sol, pts, cols);
  auto report = detail::open_output(c.output, "report.json");
  JsonWriter w(report);
  w.begin_object();
  w.key("command").value("reference");
  detail::write_problem(w, problem, problem.params);
  w.key("points").value(static_cast<std::uint64_t>(pts.size()));
  if (!roots.empty()) w.key("oracle_roots").numbers(roots);
  w.end_object();
  w.finish();
  log("reference: " + problem.name + " sampled at " + std::to_string(pts.size()) + " points");
  return 0;
}

}  // namespace rnewton::cli
