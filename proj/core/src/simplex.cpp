#include "pdbps/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pdbps {

namespace {

// Dense tableau in canonical form: one row per constraint plus a reduced-cost
// row; basis columns are kept as identity columns by Gauss-Jordan pivots.
struct Tableau {
  int rows = 0;
  int cols = 0;  // total columns excluding rhs
  std::vector<double> a;  // (rows + 1) x (cols + 1); last row = reduced costs
  std::vector<int> basis;
  std::vector<bool> dead_row;

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * (cols + 1) + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * (cols + 1) + j]; }
  double& rhs(int i) { return at(i, cols); }
  double& cost(int j) { return at(rows, j); }

  void pivot(int pr, int pc) {
    const double piv = at(pr, pc);
    const double inv = 1.0 / piv;
    for (int j = 0; j <= cols; ++j) at(pr, j) *= inv;
    at(pr, pc) = 1.0;
    for (int i = 0; i <= rows; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j <= cols; ++j) at(i, j) -= f * at(pr, j);
      at(i, pc) = 0.0;
    }
    basis[pr] = pc;
  }
};

// Bland's rule: entering = lowest-index improving column, leaving = minimum
// ratio with ties broken by the lowest basis index. Guarantees termination.
void run_simplex(Tableau& t, int enter_limit, double tol, long max_pivots) {
  for (long iter = 0; iter < max_pivots; ++iter) {
    int entering = -1;
    for (int j = 0; j < enter_limit; ++j) {
      if (t.cost(j) > tol) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return;  // optimal

    int leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.rows; ++i) {
      if (t.dead_row[i]) continue;
      const double coeff = t.at(i, entering);
      if (coeff <= tol) continue;
      const double ratio = t.rhs(i) / coeff;
      if (ratio < best_ratio - tol ||
          (ratio < best_ratio + tol && (leaving < 0 || t.basis[i] < t.basis[leaving]))) {
        best_ratio = ratio;
        leaving = i;
      }
    }
    if (leaving < 0) throw StructuralError("lp: objective unbounded above");
    t.pivot(leaving, entering);
  }
  throw StructuralError("lp: pivot limit exceeded");
}

}  // namespace

LpSolution DenseSimplex::maximize(const LinearProgram& lp) const {
  const int n = lp.num_vars;
  if (static_cast<int>(lp.objective.size()) != n)
    throw StructuralError("lp: objective size does not match num_vars");
  const int m = static_cast<int>(lp.rows.size());

  int num_slacks = 0;
  for (const auto& row : lp.rows)
    if (row.rel == LinearProgram::Rel::Le) ++num_slacks;

  // Column layout: [vars | slacks | artificials]. Rows are normalized to
  // nonnegative rhs; <= rows with negative rhs become surplus + artificial.
  int num_art = 0;
  std::vector<int> art_col(m, -1);
  std::vector<int> slack_col(m, -1);
  {
    int next_slack = n;
    for (int i = 0; i < m; ++i) {
      if (lp.rows[i].rel == LinearProgram::Rel::Le) slack_col[i] = next_slack++;
      const bool flip = lp.rows[i].rhs < 0.0;
      const bool need_art = lp.rows[i].rel == LinearProgram::Rel::Eq || flip;
      if (need_art) art_col[i] = n + num_slacks + num_art++;
    }
  }
  const int cols = n + num_slacks + num_art;

  Tableau t;
  t.rows = m;
  t.cols = cols;
  t.a.assign(static_cast<std::size_t>(m + 1) * (cols + 1), 0.0);
  t.basis.assign(m, -1);
  t.dead_row.assign(m, false);

  for (int i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    if (static_cast<int>(row.coeffs.size()) != n)
      throw StructuralError("lp: row size does not match num_vars");
    const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) t.at(i, j) = sign * row.coeffs[j];
    t.rhs(i) = sign * row.rhs;
    if (slack_col[i] >= 0) t.at(i, slack_col[i]) = sign;
    if (art_col[i] >= 0) {
      t.at(i, art_col[i]) = 1.0;
      t.basis[i] = art_col[i];
    } else {
      t.basis[i] = slack_col[i];  // <= row with rhs >= 0
    }
  }

  // Phase 1: maximize -sum(artificials); canonicalize by adding the
  // artificial rows into the cost row.
  if (num_art > 0) {
    for (int j = 0; j <= cols; ++j) t.cost(j) = 0.0;
    for (int i = 0; i < m; ++i) {
      if (art_col[i] < 0) continue;
      for (int j = 0; j <= cols; ++j) t.cost(j) += t.at(i, j);
    }
    for (int i = 0; i < m; ++i)
      if (art_col[i] >= 0) t.cost(art_col[i]) = 0.0;
    run_simplex(t, n + num_slacks, tol_, max_pivots_);

    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (t.basis[i] >= n + num_slacks) infeas += t.rhs(i);
    if (infeas > 1e-7) throw InfeasibleError("lp: infeasible (phase-1 residual " +
                                             std::to_string(infeas) + ")");

    // Drive leftover artificials out of the basis; rows with no usable
    // column are redundant and dropped from further pivoting.
    for (int i = 0; i < m; ++i) {
      if (t.basis[i] < n + num_slacks) continue;
      int col = -1;
      for (int j = 0; j < n + num_slacks; ++j) {
        if (std::abs(t.at(i, j)) > tol_) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        t.pivot(i, col);
      } else {
        t.dead_row[i] = true;
      }
    }
  }

  // Phase 2 over the real objective; artificial columns never re-enter.
  for (int j = 0; j <= cols; ++j) t.cost(j) = 0.0;
  for (int j = 0; j < n; ++j) t.cost(j) = lp.objective[j];
  for (int i = 0; i < m; ++i) {
    if (t.dead_row[i]) continue;
    const int b = t.basis[i];
    if (b < n && lp.objective[b] != 0.0) {
      const double f = lp.objective[b];
      for (int j = 0; j <= cols; ++j) t.cost(j) -= f * t.at(i, j);
    }
  }
  run_simplex(t, n + num_slacks, tol_, max_pivots_);

  LpSolution sol;
  sol.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (t.dead_row[i]) continue;
    if (t.basis[i] < n) sol.x[t.basis[i]] = t.rhs(i);
  }
  sol.value = 0.0;
  for (int j = 0; j < n; ++j) sol.value += lp.objective[j] * sol.x[j];
  return sol;
}

const LpSolver& default_lp_solver() {
  static const DenseSimplex solver;
  return solver;
}

}  // namespace pdbps
