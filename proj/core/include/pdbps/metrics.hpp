#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdbps/meta.hpp"
#include "pdbps/oracle.hpp"

namespace pdbps {

/// Regret/violation summary of one run, with the cumulative curves the
/// harness plots and fits. Regret and violation use exact occupancies; the
/// traversed curves use realized trajectories only.
struct Metrics {
  long num_episodes = 0;
  double total_reward = 0.0;  // sum_t r_t . q_t
  double opt_strong = 0.0;
  double regret_strong = 0.0;  // T opt - total
  std::optional<double> opt_weak;
  std::optional<double> regret_weak;
  std::vector<double> violation_total;  // per constraint, signed
  double violation_max = 0.0;           // V_T
  int worst_constraint = 0;             // argmax, lowest index on ties
  double competitive_ratio = 0.0;       // total / (T opt), 0 when opt == 0

  std::vector<double> cum_regret_strong;
  std::vector<double> cum_regret_weak;              // empty when unavailable
  std::vector<std::vector<double>> cum_violation;   // [m][T], signed
  std::vector<std::vector<double>> cum_violation_pos;  // per-episode positive part
  std::vector<std::vector<double>> cum_traversed;   // realized violation totals
};

Metrics compute_metrics(const RunRecord& run, double opt_strong,
                        std::optional<double> opt_weak = std::nullopt);

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  long points = 0;
};

/// Least-squares slope of log(max(curve, 1)) against log t over episodes
/// [window_lo, window_hi], 1-based inclusive. Throws StructuralError when
/// fewer than 32 points fall in the window.
SlopeFit slope_fit(std::span<const double> curve, long window_lo, long window_hi);

/// Shortest round-trip decimal rendering; the one used by every CSV writer
/// so identical runs emit identical bytes.
std::string format_double(double value);

/// Per-episode CSV, one row per episode:
///   # schema=1
///   t,reward,viol_1..m,lambda_l1,gamma,xi,cum_regret_strong,cum_regret_weak
void write_run_csv(std::ostream& out, const RunRecord& run, double opt_strong,
                   std::optional<double> opt_weak = std::nullopt);

struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> lo;  // mean - z * se
  std::vector<double> hi;
};

/// Pointwise mean and normal confidence band over same-length curves,
/// reduced in input order.
AggregateCurve aggregate_curves(std::span<const std::vector<double>> curves, double z = 1.96);

/// Aggregate CSV: t plus mean/lo/hi for the regret, positive-violation, and
/// multiplier-norm curves.
void write_aggregate_csv(std::ostream& out, const AggregateCurve& regret,
                         const AggregateCurve& violation_pos, const AggregateCurve& lambda_l1);

}  // namespace pdbps
