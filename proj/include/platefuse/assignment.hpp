#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "platefuse/geometry.hpp"

namespace platefuse {

/// Marks a (track, detection) pair that may never be matched.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Dense rows x cols matrix of non-negative costs; kInfeasible marks gated cells.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kInfeasible)
      : rows_(rows), cols_(cols), cost_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return cost_[r * cols_ + c]; }

  void set(std::size_t r, std::size_t c, double value) {
    if (!(value == kInfeasible || (std::isfinite(value) && value >= 0.0))) {
      throw std::invalid_argument("cost must be finite and non-negative");
    }
    cost_[r * cols_ + c] = value;
  }

  bool feasible(std::size_t r, std::size_t c) const { return (*this)(r, c) != kInfeasible; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> cost_;
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), ascending row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;  // summed over `pairs` in row order
};

/// Euclidean track-to-detection costs, gated strictly: distance >= epsilon
/// is infeasible.
inline CostMatrix build_cost_matrix(std::span<const Point2> track_positions,
                                    std::span<const Point2> det_centers, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  CostMatrix m(track_positions.size(), det_centers.size());
  for (std::size_t r = 0; r < track_positions.size(); ++r) {
    for (std::size_t c = 0; c < det_centers.size(); ++c) {
      const double d = distance(track_positions[r], det_centers[c]);
      if (d < epsilon) m.set(r, c, d);
    }
  }
  return m;
}

namespace detail {

inline Assignment make_assignment(const CostMatrix& m, const std::vector<long>& row_match) {
  Assignment out;
  std::vector<bool> col_used(m.cols(), false);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (row_match[r] < 0) {
      out.unmatched_rows.push_back(r);
      continue;
    }
    const auto c = static_cast<std::size_t>(row_match[r]);
    out.pairs.emplace_back(r, c);
    out.total_cost += m(r, c);
    col_used[c] = true;
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

}  // namespace detail

/// Minimum-cost matching of maximum cardinality over the feasible cells.
///
/// Successive shortest augmenting paths with Dijkstra on reduced costs
/// (the Hungarian method in primal-dual form). Every free row is a source;
/// each round augments along the cheapest path to a free column, so the
/// matching after k rounds is the cheapest one of size k. Rounds stop when no
/// free column is reachable, i.e. the cardinality is maximal. Infeasible
/// cells are not edges at all, so no large sentinel enters the arithmetic.
inline Assignment solve(const CostMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<long> row_match(rows, -1);
  std::vector<long> col_match(cols, -1);
  std::vector<double> row_pot(rows, 0.0);
  std::vector<double> col_pot(cols, 0.0);

  std::vector<double> row_dist(rows);
  std::vector<double> col_dist(cols);
  std::vector<long> col_prev(cols);
  std::vector<bool> row_done(rows);
  std::vector<bool> col_done(cols);

  for (;;) {
    for (std::size_t r = 0; r < rows; ++r) {
      row_dist[r] = row_match[r] < 0 ? 0.0 : inf;
      row_done[r] = false;
    }
    std::fill(col_dist.begin(), col_dist.end(), inf);
    std::fill(col_prev.begin(), col_prev.end(), -1);
    std::fill(col_done.begin(), col_done.end(), false);

    long target = -1;
    double target_dist = inf;
    for (;;) {
      // Pick the closest unsettled node; rows before columns, lower index first.
      double best = inf;
      long best_row = -1, best_col = -1;
      for (std::size_t r = 0; r < rows; ++r) {
        if (!row_done[r] && row_dist[r] < best) {
          best = row_dist[r];
          best_row = static_cast<long>(r);
        }
      }
      for (std::size_t c = 0; c < cols; ++c) {
        if (!col_done[c] && col_dist[c] < best) {
          best = col_dist[c];
          best_row = -1;
          best_col = static_cast<long>(c);
        }
      }
      if (best == inf) break;

      if (best_row >= 0) {
        const auto r = static_cast<std::size_t>(best_row);
        row_done[r] = true;
        for (std::size_t c = 0; c < cols; ++c) {
          if (col_done[c] || !m.feasible(r, c) || row_match[r] == static_cast<long>(c)) continue;
          // Clamp tiny negative reduced costs produced by rounding.
          const double reduced = std::max(0.0, m(r, c) + row_pot[r] - col_pot[c]);
          const double nd = row_dist[r] + reduced;
          if (nd < col_dist[c]) {
            col_dist[c] = nd;
            col_prev[c] = best_row;
          }
        }
      } else {
        const auto c = static_cast<std::size_t>(best_col);
        col_done[c] = true;
        if (col_match[c] < 0) {
          target = best_col;
          target_dist = best;
          break;
        }
        const auto r = static_cast<std::size_t>(col_match[c]);
        if (!row_done[r] && best < row_dist[r]) row_dist[r] = best;
      }
    }
    if (target < 0) break;

    for (std::size_t r = 0; r < rows; ++r) row_pot[r] += std::min(row_dist[r], target_dist);
    for (std::size_t c = 0; c < cols; ++c) col_pot[c] += std::min(col_dist[c], target_dist);

    long c = target;
    for (;;) {
      const long r = col_prev[static_cast<std::size_t>(c)];
      const long previous = row_match[static_cast<std::size_t>(r)];
      row_match[static_cast<std::size_t>(r)] = c;
      col_match[static_cast<std::size_t>(c)] = r;
      if (previous < 0) break;
      c = previous;
    }
  }

  return detail::make_assignment(m, row_match);
}

inline constexpr std::size_t kBruteForceLimit = 9;

/// Exhaustive reference solver: enumerates every feasible partial matching
/// and keeps the largest, then cheapest. The first optimum in enumeration
/// order wins ties. Exponential; for tests and the `oracle` CLI command.
inline Assignment brute_force_solve(const CostMatrix& m) {
  if (m.rows() > kBruteForceLimit || m.cols() > kBruteForceLimit) {
    throw std::invalid_argument("matrix too large for brute force");
  }
  const std::size_t rows = m.rows();
  std::vector<long> current(rows, -1);
  std::vector<long> best(rows, -1);
  std::size_t best_size = 0;
  double best_cost = 0.0;
  std::vector<bool> col_used(m.cols(), false);

  // Costs accumulate in row order, matching make_assignment's summation.
  auto recurse = [&](auto&& self, std::size_t r, std::size_t size, double cost) -> void {
    if (r == rows) {
      if (size > best_size || (size == best_size && cost < best_cost)) {
        best_size = size;
        best_cost = cost;
        best = current;
      }
      return;
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (col_used[c] || !m.feasible(r, c)) continue;
      col_used[c] = true;
      current[r] = static_cast<long>(c);
      self(self, r + 1, size + 1, cost + m(r, c));
      current[r] = -1;
      col_used[c] = false;
    }
    self(self, r + 1, size, cost);
  };

  recurse(recurse, 0, 0, 0.0);
  return detail::make_assignment(m, best);
}

}  // namespace platefuse
