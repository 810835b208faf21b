#pragma once

// Randomized Newton iteration for overdetermined systems F: R^m -> R^n.
//
// Each step draws m of the n equations uniformly at random and takes a
// Newton step on that square subsystem. Rank-deficient subsets are redrawn
// a few times before falling back to a truncated-SVD Gauss-Newton step.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnewton/errors.hpp"
#include "rnewton/linalg.hpp"

namespace rnewton {

/// Anything that exposes residual rows and Jacobian rows of F(theta).
template <class S>
concept ResidualSystemLike = requires(const S& s, const DenseVector& theta, std::span<const std::size_t> rows) {
  { s.rows() } -> std::convertible_to<std::size_t>;
  { s.unknowns() } -> std::convertible_to<std::size_t>;
  { s.eval_all(theta) } -> std::convertible_to<DenseVector>;
  { s.eval_rows(theta, rows) } -> std::convertible_to<DenseVector>;
  { s.eval_jacobian_rows(theta, rows) } -> std::convertible_to<DenseMatrix>;
};

/// F(theta) = A theta - b.
class AffineSystem {
 public:
  AffineSystem(DenseMatrix a, DenseVector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != b_.size()) throw ShapeMismatch("AffineSystem: rows of A must match b");
  }
  std::size_t rows() const { return static_cast<std::size_t>(a_.rows()); }
  std::size_t unknowns() const { return static_cast<std::size_t>(a_.cols()); }
  DenseVector eval_all(const DenseVector& theta) const { return a_ * theta - b_; }
  DenseVector eval_rows(const DenseVector& theta, std::span<const std::size_t> rows) const {
    DenseVector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      if (rows[i] >= this->rows()) throw IndexOutOfRange("AffineSystem row out of range");
      out(static_cast<Eigen::Index>(i)) = a_.row(r).dot(theta) - b_(r);
    }
    return out;
  }
  DenseMatrix eval_jacobian_rows(const DenseVector&, std::span<const std::size_t> rows) const {
    DenseMatrix out(static_cast<Eigen::Index>(rows.size()), a_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= this->rows()) throw IndexOutOfRange("AffineSystem row out of range");
      out.row(static_cast<Eigen::Index>(i)) = a_.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
  }
  const DenseMatrix& matrix() const { return a_; }
  const DenseVector& rhs() const { return b_; }

 private:
  DenseMatrix a_;
  DenseVector b_;
};

using Rng = std::mt19937_64;

/// Independent stream seed for run `index` of a batch seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Sorted m-subset of {0, ..., n-1}, every subset equally likely.
struct SubsetDraw {
  std::vector<std::size_t> indices;
};

inline SubsetDraw draw_subset(std::size_t n, std::size_t m, Rng& rng) {
  if (m > n) throw BadSize("draw_subset: cannot choose " + std::to_string(m) + " of " + std::to_string(n));
  // Floyd's sampling: one uniform draw per chosen element.
  std::vector<char> taken(n, 0);
  SubsetDraw out;
  out.indices.reserve(m);
  for (std::size_t j = n - m; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const std::size_t chosen = taken[t] ? j : t;
    taken[chosen] = 1;
    out.indices.push_back(chosen);
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

enum class StopNorm { Subset, Full };

inline std::string_view to_string(StopNorm s) { return s == StopNorm::Subset ? "subset" : "full"; }

struct SolverConfig {
  double stop_tol = 5e-3;
  std::size_t max_iters = 2000;
  double eta = 1.0;
  double rank_tol = kDefaultTruncTol;
  std::size_t resample_retries = 5;
  double divergence_factor = 1e6;
  std::uint64_t seed = 0;
  /// Which residual the stopping test looks at.
  StopNorm stop_norm = StopNorm::Subset;
  /// Halve eta until the line-search norm decreases.
  bool backtracking = false;
  std::size_t max_halvings = 10;
  StopNorm line_search_norm = StopNorm::Subset;
  /// Steps longer than this are scaled back (0 disables).
  double max_step = 0.0;

  void validate() const {
    if (!(stop_tol > 0.0)) throw ConfigError("stop_tol must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(rank_tol > 0.0)) throw ConfigError("rank_tol must be positive");
    if (max_step < 0.0) throw ConfigError("max_step must be non-negative");
  }
};

enum class Termination { Converged, MaxIters, Diverged, StructurallySingular };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIters: return "MaxIters";
    case Termination::Diverged: return "Diverged";
    case Termination::StructurallySingular: return "StructurallySingular";
  }
  return "?";
}

struct StepInfo {
  std::vector<std::size_t> subset;
  double subset_norm = 0.0;
  double condition = std::numeric_limits<double>::infinity();
  bool fallback = false;
  std::size_t redraws = 0;
  double eta = 1.0;
};

struct HistoryEntry {
  std::size_t iteration = 0;
  double subset_norm = 0.0;
  double full_norm = 0.0;
  double condition = std::numeric_limits<double>::quiet_NaN();
};

struct SolveReport {
  bool converged = false;
  std::size_t iterations = 0;
  Termination termination = Termination::MaxIters;
  std::vector<HistoryEntry> residual_history;
  DenseVector final_theta;
  std::vector<std::vector<std::size_t>> subset_log;
  std::vector<double> condition_history;
  double final_condition = std::numeric_limits<double>::quiet_NaN();
  double final_subset_norm = 0.0;
  double final_full_norm = 0.0;
  std::size_t fallback_steps = 0;
  std::size_t redraws = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double norm_of(const DenseVector& v) { return v.norm(); }

inline DenseVector gather(const DenseVector& all, std::span<const std::size_t> rows) {
  DenseVector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = all(static_cast<Eigen::Index>(rows[i]));
  return out;
}

struct SubsetStep {
  DenseVector direction;
  double condition = std::numeric_limits<double>::infinity();
  bool full_rank = false;
};

// Newton direction J^{-1} F on a square subset, or nothing when the subset
// Jacobian is numerically rank deficient.
inline SubsetStep square_direction(const DenseMatrix& jac, const DenseVector& f, double rank_tol) {
  SubsetStep out;
  const auto spectrum = spectrum_summary(jac, rank_tol);
  out.condition = spectrum.condition;
  if (spectrum.rank < static_cast<std::size_t>(jac.cols()) || jac.rows() != jac.cols()) return out;
  try {
    out.direction = solve_square(jac, f);
    out.full_rank = out.direction.allFinite();
  } catch (const SingularMatrix&) {
    out.full_rank = false;
  }
  return out;
}

}  // namespace detail

/// Newton direction for an already drawn subset; redraws on rank
/// deficiency and finally falls back to a truncated-SVD least-squares step.
/// On return `info.subset` holds the subset actually used.
template <ResidualSystemLike System>
DenseVector subset_direction(const System& sys, const DenseVector& theta, const SolverConfig& cfg, Rng& rng,
                             StepInfo& info) {
  const std::size_t n = sys.rows();
  const std::size_t m = sys.unknowns();
  for (std::size_t attempt = 0;; ++attempt) {
    const DenseVector f = sys.eval_rows(theta, info.subset);
    const DenseMatrix jac = sys.eval_jacobian_rows(theta, info.subset);
    auto step = detail::square_direction(jac, f, cfg.rank_tol);
    info.condition = step.condition;
    if (step.full_rank) return step.direction;
    if (attempt < cfg.resample_retries) {
      info.subset = draw_subset(n, m, rng).indices;
      ++info.redraws;
      continue;
    }
    info.fallback = true;
    DenseVector dir;
    try {
      dir = solve_least_squares(jac, f, cfg.rank_tol);
    } catch (const ZeroMatrix&) {
      throw StructurallySingular("subset Jacobian vanishes; no step direction available");
    }
    if (!dir.allFinite()) throw StructurallySingular("least-squares step is not finite");
    return dir;
  }
}

/// Scales the raw direction (step cap, fixed eta or backtracking) and
/// returns the new iterate.
template <ResidualSystemLike System>
DenseVector apply_step(const System& sys, const DenseVector& theta, DenseVector dir, const SolverConfig& cfg,
                       StepInfo& info) {
  if (cfg.max_step > 0.0) {
    const double len = dir.norm();
    if (len > cfg.max_step) dir *= cfg.max_step / len;
  }
  double eta = cfg.eta;
  if (cfg.backtracking) {
    auto measure = [&](const DenseVector& t) {
      return cfg.line_search_norm == StopNorm::Full ? sys.eval_all(t).norm()
                                                    : sys.eval_rows(t, info.subset).norm();
    };
    const double base = measure(theta);
    std::size_t h = 0;
    for (; h < cfg.max_halvings; ++h) {
      const DenseVector trial = theta - eta * dir;
      const double v = measure(trial);
      if (std::isfinite(v) && v < base) break;
      eta *= 0.5;
    }
  }
  info.eta = eta;
  return theta - eta * dir;
}

/// One randomized Newton step from theta.
template <ResidualSystemLike System>
std::pair<DenseVector, StepInfo> randomized_newton_step(const System& sys, const DenseVector& theta,
                                                        const SolverConfig& cfg, Rng& rng) {
  if (static_cast<std::size_t>(theta.size()) != sys.unknowns()) throw ShapeMismatch("theta has wrong length");
  StepInfo info;
  info.subset = draw_subset(sys.rows(), sys.unknowns(), rng).indices;
  info.subset_norm = sys.eval_rows(theta, info.subset).norm();
  DenseVector dir = subset_direction(sys, theta, cfg, rng, info);
  DenseVector next = apply_step(sys, theta, std::move(dir), cfg, info);
  return {std::move(next), std::move(info)};
}

/// Iterates randomized Newton steps until the stopping norm drops below
/// stop_tol, the iteration cap is hit, or the full residual blows up.
template <ResidualSystemLike System>
SolveReport solve(const System& sys, const DenseVector& init, const SolverConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(init.size()) != sys.unknowns()) throw ShapeMismatch("initial theta has wrong length");
  if (sys.rows() < sys.unknowns()) throw Underdetermined("solve needs at least as many rows as unknowns");
  Rng rng(cfg.seed);
  SolveReport report;
  report.seed = cfg.seed;
  DenseVector theta = init;
  double initial_norm = 0.0;
  std::vector<std::size_t> last_subset;

  auto finish = [&](Termination t) {
    report.termination = t;
    report.converged = t == Termination::Converged;
    report.iterations = report.residual_history.size();
    report.final_theta = theta;
    if (!report.residual_history.empty()) {
      report.final_subset_norm = report.residual_history.back().subset_norm;
      report.final_full_norm = report.residual_history.back().full_norm;
    }
    if (!last_subset.empty() && theta.allFinite()) {
      report.final_condition = condition_number(sys.eval_jacobian_rows(theta, last_subset));
    }
    return report;
  };

  for (std::size_t k = 0; k < cfg.max_iters; ++k) {
    const DenseVector all = sys.eval_all(theta);
    const double full = all.norm();
    if (k == 0) initial_norm = full;
    HistoryEntry entry;
    entry.iteration = k;
    entry.full_norm = full;
    StepInfo info;
    info.subset = draw_subset(sys.rows(), sys.unknowns(), rng).indices;
    entry.subset_norm = detail::gather(all, info.subset).norm();
    last_subset = info.subset;
    if (!std::isfinite(full) || (k > 0 && full > cfg.divergence_factor * initial_norm)) {
      report.residual_history.push_back(entry);
      report.subset_log.push_back(info.subset);
      report.condition_history.push_back(entry.condition);
      return finish(Termination::Diverged);
    }
    const double stop_value = cfg.stop_norm == StopNorm::Full ? full : entry.subset_norm;
    if (stop_value < cfg.stop_tol) {
      report.residual_history.push_back(entry);
      report.subset_log.push_back(info.subset);
      report.condition_history.push_back(entry.condition);
      return finish(Termination::Converged);
    }
    DenseVector dir;
    try {
      dir = subset_direction(sys, theta, cfg, rng, info);
    } catch (const StructurallySingular&) {
      report.residual_history.push_back(entry);
      report.subset_log.push_back(info.subset);
      report.condition_history.push_back(entry.condition);
      return finish(Termination::StructurallySingular);
    }
    entry.condition = info.condition;
    report.fallback_steps += info.fallback ? 1 : 0;
    report.redraws += info.redraws;
    report.residual_history.push_back(entry);
    report.subset_log.push_back(info.subset);
    report.condition_history.push_back(info.condition);
    last_subset = info.subset;
    theta = apply_step(sys, theta, std::move(dir), cfg, info);
  }
  return finish(Termination::MaxIters);
}

// ---------------------------------------------------------------------------
// Expectation / covariance diagnostics over the full subset set Gamma.

inline constexpr double kMaxEnumeration = 1e6;

inline double binomial(std::size_t n, std::size_t m) {
  if (m > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= m; ++i) r = r * static_cast<double>(n - m + i) / static_cast<double>(i);
  return std::round(r);
}

/// Calls fn(indices) for every sorted m-subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t m, Fn&& fn) {
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  if (m > n) return;
  while (true) {
    fn(std::span<const std::size_t>(idx));
    std::size_t i = m;
    while (i > 0 && idx[i - 1] == n - m + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// Newton direction J_s^{-1} F_s on subset s with the solver's fallback rule.
inline DenseVector subset_newton_direction(const DenseMatrix& jac_all, const DenseVector& f_all,
                                           std::span<const std::size_t> rows, double rank_tol) {
  DenseMatrix js(static_cast<Eigen::Index>(rows.size()), jac_all.cols());
  DenseVector fs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    js.row(static_cast<Eigen::Index>(i)) = jac_all.row(static_cast<Eigen::Index>(rows[i]));
    fs(static_cast<Eigen::Index>(i)) = f_all(static_cast<Eigen::Index>(rows[i]));
  }
  auto step = detail::square_direction(js, fs, rank_tol);
  if (step.full_rank) return step.direction;
  return solve_least_squares(js, fs, rank_tol);
}

struct ExpectationDiagnostic {
  DenseVector lhs;  // pseudoinverse step J^+ F
  DenseVector rhs;  // mean subset Newton step over Gamma
  double discrepancy = 0.0;
  std::size_t subsets = 0;
};

namespace detail {

template <ResidualSystemLike System>
std::pair<DenseVector, DenseMatrix> full_system(const System& sys, const DenseVector& theta) {
  std::vector<std::size_t> all(sys.rows());
  std::iota(all.begin(), all.end(), 0);
  return {sys.eval_all(theta), sys.eval_jacobian_rows(theta, all)};
}

template <ResidualSystemLike System>
void require_enumerable(const System& sys) {
  const double count = binomial(sys.rows(), sys.unknowns());
  if (count > kMaxEnumeration) {
    throw TooLarge("enumerating " + std::to_string(count) + " subsets exceeds the limit of 1e6");
  }
}

}  // namespace detail

/// Compares the pseudoinverse step with the exact average of subset Newton
/// steps. Reported, never asserted: equality is an assumption, not a fact.
template <ResidualSystemLike System>
ExpectationDiagnostic expectation_diagnostic(const System& sys, const DenseVector& theta,
                                             double rank_tol = kDefaultTruncTol) {
  detail::require_enumerable(sys);
  const auto [f, jac] = detail::full_system(sys, theta);
  ExpectationDiagnostic out;
  const auto m = static_cast<Eigen::Index>(sys.unknowns());
  out.rhs = DenseVector::Zero(m);
  if (f.norm() == 0.0) {
    out.lhs = DenseVector::Zero(m);
  } else {
    out.lhs = solve_least_squares(jac, f, rank_tol);
  }
  for_each_subset(sys.rows(), sys.unknowns(), [&](std::span<const std::size_t> s) {
    out.rhs += subset_newton_direction(jac, f, s, rank_tol);
    ++out.subsets;
  });
  out.rhs /= static_cast<double>(out.subsets);
  const double base = out.lhs.norm();
  const double diff = (out.lhs - out.rhs).norm();
  out.discrepancy = base > 0.0 ? diff / base : diff;
  return out;
}

/// Covariance of the stochastic step residual: eta * (E[s s^T] - p p^T)
/// with s the subset Newton step and p the pseudoinverse step.
template <ResidualSystemLike System>
DenseMatrix covariance_diagnostic(const System& sys, const DenseVector& theta, double eta,
                                  double rank_tol = kDefaultTruncTol) {
  detail::require_enumerable(sys);
  const auto [f, jac] = detail::full_system(sys, theta);
  const auto m = static_cast<Eigen::Index>(sys.unknowns());
  const DenseVector p = f.norm() == 0.0 ? DenseVector(DenseVector::Zero(m)) : solve_least_squares(jac, f, rank_tol);
  DenseMatrix second = DenseMatrix::Zero(m, m);
  std::size_t count = 0;
  for_each_subset(sys.rows(), sys.unknowns(), [&](std::span<const std::size_t> s) {
    const DenseVector step = subset_newton_direction(jac, f, s, rank_tol);
    second.noalias() += step * step.transpose();
    ++count;
  });
  DenseMatrix sigma = eta * (second / static_cast<double>(count) - p * p.transpose());
  return sigma;
}

}  // namespace rnewton
