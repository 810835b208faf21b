#pragma once

// Convergence-order estimation and Table-style aggregation of solve runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "rnewton/errors.hpp"

namespace rnewton {

/// Residuals at or below this are treated as round-off.
inline constexpr double kResidualFloor = 1e-13;

struct ConvergenceEstimate {
  double order = 0.0;
  std::size_t first = 0;  // index of the first residual in the fit window
  std::size_t last = 0;   // index of the last residual in the fit window
  double r_squared = 0.0;
};

/// Slope of log r_{k+1} against log r_k over the strictly decreasing tail
/// above the floor. `max_points` limits the window to the last residuals
/// of that tail (0 keeps the whole tail).
inline ConvergenceEstimate estimate_order(std::span<const double> r, std::size_t max_points = 0) {
  std::size_t end = r.size();
  while (end > 0 && !(r[end - 1] > kResidualFloor)) --end;
  if (end == 0) throw InsufficientTail("no residuals above the floor");
  std::size_t begin = end - 1;
  while (begin > 0 && r[begin - 1] > r[begin] && std::isfinite(r[begin - 1])) --begin;
  if (max_points >= 4 && end - begin > max_points) begin = end - max_points;
  if (end - begin < 4) {
    throw InsufficientTail("need at least 4 strictly decreasing residuals, found " + std::to_string(end - begin));
  }
  const std::size_t m = end - begin - 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = begin; i + 1 < end; ++i) {
    const double x = std::log(r[i]), y = std::log(r[i + 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(m);
  const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
  ConvergenceEstimate est;
  est.first = begin;
  est.last = end - 1;
  est.order = cxy / cxx;
  est.r_squared = (cxx > 0.0 && cyy > 0.0) ? (cxy * cxy) / (cxx * cyy) : 1.0;
  return est;
}

/// One row of a Table-1 style summary.
struct TableRow {
  std::size_t sample_points = 0;
  std::size_t nodes = 0;
  std::size_t variables = 0;
  std::size_t iterations = 0;
  double error = 0.0;
  bool converged = false;
};

/// Rows sorted by (sample points, nodes); the sort is stable so equal keys
/// keep their input order.
inline std::vector<TableRow> aggregate_table(std::vector<TableRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    return std::tie(a.sample_points, a.nodes) < std::tie(b.sample_points, b.nodes);
  });
  return rows;
}

inline void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows) {
  os << "sample_points,nodes,variables,iterations,error,converged\n";
  const auto old = os.precision(17);
  for (const auto& r : rows) {
    os << r.sample_points << "," << r.nodes << "," << r.variables << "," << r.iterations << "," << r.error << ","
       << (r.converged ? "true" : "false") << "\n";
  }
  os.precision(old);
}

}  // namespace rnewton
