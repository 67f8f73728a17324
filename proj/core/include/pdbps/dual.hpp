#pragma once

#include <span>
#include <vector>

#include "pdbps/cmdp.hpp"
#include "pdbps/fspodb.hpp"

namespace pdbps {

/// Projected online gradient ascent on the Lagrange multipliers over the box
/// [0, T^{1/4}]^m. The step adds the traversed violations, so multipliers
/// grow exactly when constraints are being violated along realized paths.
class DualOgd {
 public:
  DualOgd(int num_constraints, int horizon, int num_states, int num_actions,
          long num_episodes, double delta, ConstantMode mode,
          double practical_step = 0.0);

  std::span<const double> multipliers() const { return multipliers_; }
  double l1_norm() const;
  double step_size() const { return step_size_; }
  double cap() const { return cap_; }

  /// One ascent step with componentwise clamping to the box. Each gradient
  /// component must lie in [-H, H].
  void step(std::span<const double> traversed_violations);

 private:
  int num_constraints_;
  int horizon_;
  double step_size_;
  double cap_;
  std::vector<double> multipliers_;
};

/// Closed-form interval regret bound of projected gradient ascent:
/// ||start - comparator||^2 / (2 eta) + (eta/2) (t2 - t1 + 1) m H^2.
/// Diagnostic only; episodes are inclusive.
double dual_interval_regret_bound(long t1, long t2, std::span<const double> multipliers_at_t1,
                                  std::span<const double> comparator, double step_size,
                                  int horizon);

}  // namespace pdbps
