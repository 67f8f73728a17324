#pragma once

#include <memory>
#include <vector>

#include "pdbps/errors.hpp"

namespace pdbps {

/// max c^T x subject to the given rows and x >= 0.
struct LinearProgram {
  enum class Rel { Eq, Le };
  struct Row {
    std::vector<double> coeffs;
    Rel rel;
    double rhs;
  };

  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Row> rows;

  Row& add_row(Rel rel, double rhs) {
    rows.push_back(Row{std::vector<double>(num_vars, 0.0), rel, rhs});
    return rows.back();
  }
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> x;
};

/// Solver interface; the bundled implementation is a dense solver, an
/// external one can be swapped in behind it.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  /// Throws InfeasibleError when no feasible point exists.
  virtual LpSolution maximize(const LinearProgram& lp) const = 0;
};

/// Dense two-phase primal simplex with Bland's rule. Deterministic pivoting,
/// no dependencies; meant for desk-scale instances (a few thousand cells).
class DenseSimplex final : public LpSolver {
 public:
  explicit DenseSimplex(double tol = 1e-9, long max_pivots = 200000)
      : tol_(tol), max_pivots_(max_pivots) {}

  LpSolution maximize(const LinearProgram& lp) const override;

 private:
  double tol_;
  long max_pivots_;
};

const LpSolver& default_lp_solver();

}  // namespace pdbps
