#pragma once

// Rectangular minimum-cost assignment (Hungarian method with potentials).
//
// Among all minimum-cost assignments the solver returns the one whose
// row-to-column list is lexicographically smallest, preferring a real column
// over leaving a row unassigned. Forbidden cells are never used; rows that
// cannot be placed otherwise stay unassigned.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "usim/error.hpp"

namespace usim {

class CostMatrix {
 public:
  static constexpr std::int64_t kForbidden = -1;

  CostMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::int64_t& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
  std::int64_t at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  bool forbidden(std::size_t r, std::size_t c) const { return at(r, c) == kForbidden; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::int64_t> cells_;
};

struct AssignmentResult {
  std::vector<std::optional<std::size_t>> row_to_col;
  std::int64_t total_cost = 0;
};

namespace detail {

class HungarianSolver {
 public:
  explicit HungarianSolver(const CostMatrix& m)
      : m_(m), n_(std::max(m.rows(), m.cols())), cost_(n_ * n_, 0) {
    std::int64_t max_cell = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (m.forbidden(r, c)) continue;
        if (m.at(r, c) < 0) throw PreconditionError("assignment costs must be non-negative");
        max_cell = std::max(max_cell, m.at(r, c));
      }
    // Any assignment using one fewer forbidden cell is strictly cheaper.
    big_ = (max_cell + 1) * static_cast<std::int64_t>(n_ + 1);
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) cost_[r * n_ + c] = m.forbidden(r, c) ? big_ : m.at(r, c);
  }

  AssignmentResult solve() {
    AssignmentResult out;
    out.row_to_col.assign(m_.rows(), std::nullopt);
    if (m_.rows() == 0 || m_.cols() == 0) return out;
    run_hungarian();
    refine_lexicographic();
    for (std::size_t r = 0; r < m_.rows(); ++r) {
      const std::size_t c = row_match_[r];
      if (c < m_.cols() && !m_.forbidden(r, c)) {
        out.row_to_col[r] = c;
        out.total_cost += m_.at(r, c);
      }
    }
    return out;
  }

 private:
  std::int64_t cost(std::size_t r, std::size_t c) const { return cost_[r * n_ + c]; }
  bool tight(std::size_t r, std::size_t c) const { return cost(r, c) - pu_[r] - pv_[c] == 0; }
  bool real_allowed(std::size_t r, std::size_t c) const { return c < m_.cols() && !m_.forbidden(r, c); }

  // Shortest augmenting path formulation; rows and columns are 1-based inside.
  void run_hungarian() {
    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> u(n_ + 1, 0), v(n_ + 1, 0);
    std::vector<std::size_t> p(n_ + 1, 0), way(n_ + 1, 0);
    for (std::size_t i = 1; i <= n_; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::vector<std::int64_t> minv(n_ + 1, inf);
      std::vector<char> used(n_ + 1, 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = p[j0];
        std::int64_t delta = inf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n_; ++j) {
          if (used[j]) continue;
          const std::int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= n_; ++j) {
          if (used[j]) {
            u[p[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (p[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        p[j0] = p[j1];
        j0 = j1;
      } while (j0 != 0);
    }
    row_match_.assign(n_, 0);
    col_match_.assign(n_, 0);
    for (std::size_t j = 1; j <= n_; ++j) {
      row_match_[p[j] - 1] = j - 1;
      col_match_[j - 1] = p[j] - 1;
    }
    pu_.assign(n_, 0);
    pv_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) pu_[i] = u[i + 1];
    for (std::size_t j = 0; j < n_; ++j) pv_[j] = v[j + 1];
  }

  // Every optimal assignment is a perfect matching on tight cells. Fix rows in
  // order, moving each to its smallest feasible real column by rotating along
  // an alternating cycle of tight cells through unfixed rows.
  void refine_lexicographic() {
    std::vector<char> fixed(n_, 0);
    for (std::size_t r = 0; r < m_.rows(); ++r) {
      for (std::size_t c = 0; c < m_.cols(); ++c) {
        if (!real_allowed(r, c)) continue;
        if (row_match_[r] == c) break;
        if (!tight(r, c) || fixed[col_match_[c]]) continue;
        if (reroute(r, c, fixed)) break;
      }
      fixed[r] = 1;
    }
  }

  bool reroute(std::size_t row, std::size_t col, const std::vector<char>& fixed) {
    const std::size_t target = row_match_[row];
    std::vector<char> seen_col(n_, 0);
    std::vector<std::size_t> path_rows;
    std::vector<std::size_t> path_cols;
    seen_col[col] = 1;
    seen_col[target] = 1;
    if (!search(col_match_[col], target, row, fixed, seen_col, path_rows, path_cols)) return false;
    // path_rows[k] moves to path_cols[k]; the path starts at the owner of col.
    row_match_[row] = col;
    col_match_[col] = row;
    for (std::size_t k = 0; k < path_rows.size(); ++k) {
      row_match_[path_rows[k]] = path_cols[k];
      col_match_[path_cols[k]] = path_rows[k];
    }
    return true;
  }

  bool search(std::size_t r, std::size_t target, std::size_t excluded, const std::vector<char>& fixed,
              std::vector<char>& seen_col, std::vector<std::size_t>& rows, std::vector<std::size_t>& cols) {
    for (std::size_t c = 0; c < n_; ++c) {
      if (c == row_match_[r] || !tight(r, c)) continue;
      if (c == target) {
        rows.push_back(r);
        cols.push_back(c);
        return true;
      }
      if (seen_col[c]) continue;
      seen_col[c] = 1;
      const std::size_t owner = col_match_[c];
      if (owner == excluded || fixed[owner]) continue;
      rows.push_back(r);
      cols.push_back(c);
      if (search(owner, target, excluded, fixed, seen_col, rows, cols)) return true;
      rows.pop_back();
      cols.pop_back();
    }
    return false;
  }

  const CostMatrix& m_;
  std::size_t n_;
  std::vector<std::int64_t> cost_;
  std::int64_t big_ = 0;
  std::vector<std::size_t> row_match_, col_match_;
  std::vector<std::int64_t> pu_, pv_;
};

}  // namespace detail

inline AssignmentResult solve_assignment(const CostMatrix& m) { return detail::HungarianSolver(m).solve(); }

}  // namespace usim
