#include "pdbps/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace pdbps {

Metrics compute_metrics(const RunRecord& run, double opt_strong,
                        std::optional<double> opt_weak) {
  Metrics m;
  const long T = static_cast<long>(run.episodes.size());
  m.num_episodes = T;
  m.opt_strong = opt_strong;
  m.opt_weak = opt_weak;
  const int nc = run.episodes.empty() ? 0 : static_cast<int>(run.episodes[0].violation_exact.size());

  m.cum_regret_strong.resize(T);
  if (opt_weak.has_value()) m.cum_regret_weak.resize(T);
  m.cum_violation.assign(nc, std::vector<double>(T, 0.0));
  m.cum_violation_pos.assign(nc, std::vector<double>(T, 0.0));
  m.cum_traversed.assign(nc, std::vector<double>(T, 0.0));
  m.violation_total.assign(nc, 0.0);

  double reward_acc = 0.0;
  std::vector<double> viol_acc(nc, 0.0), viol_pos_acc(nc, 0.0), trav_acc(nc, 0.0);
  for (long t = 0; t < T; ++t) {
    const auto& ep = run.episodes[t];
    reward_acc += ep.reward_exact;
    m.cum_regret_strong[t] = static_cast<double>(t + 1) * opt_strong - reward_acc;
    if (opt_weak.has_value())
      m.cum_regret_weak[t] = static_cast<double>(t + 1) * *opt_weak - reward_acc;
    for (int i = 0; i < nc; ++i) {
      viol_acc[i] += ep.violation_exact[i];
      viol_pos_acc[i] += std::max(0.0, ep.violation_exact[i]);
      trav_acc[i] += ep.violation_traversed[i];
      m.cum_violation[i][t] = viol_acc[i];
      m.cum_violation_pos[i][t] = viol_pos_acc[i];
      m.cum_traversed[i][t] = trav_acc[i];
    }
  }
  m.total_reward = reward_acc;
  m.regret_strong = static_cast<double>(T) * opt_strong - reward_acc;
  if (opt_weak.has_value()) m.regret_weak = static_cast<double>(T) * *opt_weak - reward_acc;
  m.violation_total = viol_acc;
  m.worst_constraint = 0;
  m.violation_max = nc > 0 ? viol_acc[0] : 0.0;
  for (int i = 1; i < nc; ++i)
    if (viol_acc[i] > m.violation_max) {
      m.violation_max = viol_acc[i];
      m.worst_constraint = i;
    }
  m.competitive_ratio =
      opt_strong != 0.0 ? reward_acc / (static_cast<double>(T) * opt_strong) : 0.0;
  return m;
}

SlopeFit slope_fit(std::span<const double> curve, long window_lo, long window_hi) {
  window_lo = std::max<long>(1, window_lo);
  window_hi = std::min<long>(static_cast<long>(curve.size()), window_hi);
  const long n = window_hi - window_lo + 1;
  if (n < 32)
    throw StructuralError("slope_fit: window holds " + std::to_string(std::max<long>(0, n)) +
                          " points, need at least 32");

  double sx = 0.0, sy = 0.0;
  for (long t = window_lo; t <= window_hi; ++t) {
    sx += std::log(static_cast<double>(t));
    sy += std::log(std::max(curve[t - 1], 1.0));
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (long t = window_lo; t <= window_hi; ++t) {
    const double dx = std::log(static_cast<double>(t)) - mx;
    const double dy = std::log(std::max(curve[t - 1], 1.0)) - my;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  double rss = 0.0;
  for (long t = window_lo; t <= window_hi; ++t) {
    const double dx = std::log(static_cast<double>(t)) - mx;
    const double dy = std::log(std::max(curve[t - 1], 1.0)) - my;
    const double r = dy - fit.slope * dx;
    rss += r * r;
  }
  fit.std_error = std::sqrt(rss / (static_cast<double>(n - 2) * sxx));
  return fit;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_run_csv(std::ostream& out, const RunRecord& run, double opt_strong,
                   std::optional<double> opt_weak) {
  const int nc =
      run.episodes.empty() ? 0 : static_cast<int>(run.episodes[0].violation_exact.size());
  out << "# schema=1\n";
  out << "t,reward";
  for (int i = 1; i <= nc; ++i) out << ",viol_" << i;
  out << ",lambda_l1,gamma,xi,cum_regret_strong,cum_regret_weak\n";
  double reward_acc = 0.0;
  for (const auto& ep : run.episodes) {
    reward_acc += ep.reward_exact;
    out << ep.t << ',' << format_double(ep.reward_exact);
    for (int i = 0; i < nc; ++i) out << ',' << format_double(ep.violation_exact[i]);
    out << ',' << format_double(ep.lambda_l1) << ',' << format_double(ep.shift) << ','
        << format_double(ep.loss_range) << ','
        << format_double(static_cast<double>(ep.t) * opt_strong - reward_acc) << ','
        << (opt_weak.has_value()
                ? format_double(static_cast<double>(ep.t) * *opt_weak - reward_acc)
                : std::string("nan"))
        << '\n';
  }
}

AggregateCurve aggregate_curves(std::span<const std::vector<double>> curves, double z) {
  if (curves.empty()) throw StructuralError("aggregate: no curves");
  const std::size_t T = curves[0].size();
  for (const auto& c : curves)
    if (c.size() != T) throw StructuralError("aggregate: curves must share a length");
  const double n = static_cast<double>(curves.size());

  AggregateCurve out;
  out.mean.assign(T, 0.0);
  out.lo.assign(T, 0.0);
  out.hi.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[t];
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& c : curves) var += (c[t] - mean) * (c[t] - mean);
    var = curves.size() > 1 ? var / (n - 1.0) : 0.0;
    const double half = z * std::sqrt(var / n);
    out.mean[t] = mean;
    out.lo[t] = mean - half;
    out.hi[t] = mean + half;
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const AggregateCurve& regret,
                         const AggregateCurve& violation_pos, const AggregateCurve& lambda_l1) {
  out << "# schema=1\n";
  out << "t,regret_mean,regret_lo,regret_hi,violpos_mean,violpos_lo,violpos_hi,"
         "lambda_mean,lambda_lo,lambda_hi\n";
  for (std::size_t t = 0; t < regret.mean.size(); ++t) {
    out << (t + 1) << ',' << format_double(regret.mean[t]) << ',' << format_double(regret.lo[t])
        << ',' << format_double(regret.hi[t]) << ',' << format_double(violation_pos.mean[t])
        << ',' << format_double(violation_pos.lo[t]) << ',' << format_double(violation_pos.hi[t])
        << ',' << format_double(lambda_l1.mean[t]) << ',' << format_double(lambda_l1.lo[t])
        << ',' << format_double(lambda_l1.hi[t]) << '\n';
  }
}

}  // namespace pdbps
