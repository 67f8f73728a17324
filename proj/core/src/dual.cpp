#include "pdbps/dual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pdbps {

DualOgd::DualOgd(int num_constraints, int horizon, int num_states, int num_actions,
                 long num_episodes, double delta, ConstantMode mode, double practical_step)
    : num_constraints_(num_constraints), horizon_(horizon) {
  if (num_episodes <= 0) throw StructuralError("dual: num_episodes must be positive");
  const double t = static_cast<double>(num_episodes);
  cap_ = std::pow(t, 0.25);
  if (num_constraints_ == 0) {
    step_size_ = 0.0;
  } else if (mode == ConstantMode::Paper) {
    const double d = 84672.0 * num_constraints * horizon * horizon *
                     static_cast<double>(num_states) * num_states * num_actions;
    const double log_term =
        std::log(num_actions * static_cast<double>(num_states) * num_states * t * t / delta);
    step_size_ = 1.0 / (d * log_term * std::sqrt(t));
  } else {
    step_size_ = practical_step > 0.0 ? practical_step : 1.0 / std::sqrt(t);
  }
  multipliers_.assign(num_constraints_, 0.0);
}

double DualOgd::l1_norm() const {
  double s = 0.0;
  for (double l : multipliers_) s += l;  // the box keeps every component >= 0
  return s;
}

void DualOgd::step(std::span<const double> traversed_violations) {
  if (static_cast<int>(traversed_violations.size()) != num_constraints_)
    throw StructuralError("dual: gradient size does not match the constraint count");
  for (int i = 0; i < num_constraints_; ++i) {
    const double g = traversed_violations[i];
    if (!(g >= -static_cast<double>(horizon_) && g <= static_cast<double>(horizon_)))
      throw StructuralError("dual: gradient component " + std::to_string(i) +
                            " outside [-H, H]");
    multipliers_[i] = std::clamp(multipliers_[i] + step_size_ * g, 0.0, cap_);
  }
}

double dual_interval_regret_bound(long t1, long t2, std::span<const double> multipliers_at_t1,
                                  std::span<const double> comparator, double step_size,
                                  int horizon) {
  if (t1 > t2) throw StructuralError("dual bound: t1 must not exceed t2");
  if (multipliers_at_t1.size() != comparator.size())
    throw StructuralError("dual bound: comparator size mismatch");
  double dist_sq = 0.0;
  for (std::size_t i = 0; i < comparator.size(); ++i) {
    const double d = multipliers_at_t1[i] - comparator[i];
    dist_sq += d * d;
  }
  const double len = static_cast<double>(t2 - t1 + 1);
  const double m = static_cast<double>(comparator.size());
  return dist_sq / (2.0 * step_size) +
         0.5 * step_size * len * m * horizon * static_cast<double>(horizon);
}

}  // namespace pdbps
