#include "pdbps/envelope.hpp"

#include <cmath>
#include <limits>

#include "pdbps/errors.hpp"
#include "pdbps/oracle.hpp"

namespace pdbps {

BoundEnvelope envelope(int num_states, int num_actions, int horizon, int num_constraints,
                       long num_episodes, double delta, double rho) {
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0 || num_constraints < 0)
    throw StructuralError("envelope: instance shape must be positive");
  if (num_episodes <= 0 || !(delta > 0.0 && delta < 1.0))
    throw StructuralError("envelope: need num_episodes > 0 and delta in (0,1)");

  const double x = num_states, a = num_actions, h = horizon, m = num_constraints;
  const double t = static_cast<double>(num_episodes);

  BoundEnvelope env;
  env.num_states = num_states;
  env.num_actions = num_actions;
  env.horizon = horizon;
  env.num_constraints = num_constraints;
  env.num_episodes = num_episodes;
  env.delta = delta;
  env.rho = rho;

  env.u1 = 6.0 * h * h * std::log(h * a * t * t / delta);
  env.u2 = 9.0 * h * x * a;
  env.u3 = 0.5 * h * std::log(h * t * t / delta);
  env.u4 = 30.0 * h * h * x * x * std::sqrt(2.0 * a * std::log(t * x * x * a / delta));
  env.d1 = 0.5;
  env.d2 = 0.5 * m * h * h;
  env.b1 = 2.0 * h * std::sqrt(std::log(t * t / delta));
  env.f1 = h * std::sqrt(2.0 * std::log(t * t / delta));
  env.scale_c = 252.0 * x * a * h;
  env.dual_scale_d = 84672.0 * m * h * h * x * x * a;
  env.eta_paper =
      m > 0 ? 1.0 / (env.dual_scale_d * std::log(a * x * x * t * t / delta) * std::sqrt(t))
            : 0.0;
  env.lambda_cap = lambda_cap_for(rho, num_constraints, horizon);
  env.condition2_threshold = condition2_threshold(horizon, num_constraints, num_episodes);
  env.condition2_holds = rho >= env.condition2_threshold;
  return env;
}

double BoundEnvelope::primal_bound(long t1, long t2, double loss_range) const {
  const double len = static_cast<double>(t2 - t1 + 1);
  const double rt = std::sqrt(static_cast<double>(num_episodes));
  return u1 * loss_range * scale_c * rt + u2 * loss_range * len / (scale_c * rt) +
         u3 * loss_range / (scale_c * rt) + u4 * loss_range * rt;
}

double BoundEnvelope::dual_bound(long t1, long t2, double lambda_t1_sq_norm) const {
  const double len = static_cast<double>(t2 - t1 + 1);
  return d1 * lambda_t1_sq_norm / eta_paper + d2 * eta_paper * len;
}

double BoundEnvelope::constraint_dev_bound(long t1, long t2) const {
  return b1 * std::sqrt(static_cast<double>(t2 - t1 + 1));
}

double BoundEnvelope::indicator_dev_bound(long t1, long t2) const {
  return f1 * std::sqrt(static_cast<double>(t2 - t1 + 1));
}

nlohmann::json envelope_to_json(const BoundEnvelope& env) {
  nlohmann::json doc;
  doc["num_states"] = env.num_states;
  doc["num_actions"] = env.num_actions;
  doc["horizon"] = env.horizon;
  doc["num_constraints"] = env.num_constraints;
  doc["num_episodes"] = env.num_episodes;
  doc["delta"] = env.delta;
  doc["rho"] = env.rho;
  doc["U1"] = env.u1;
  doc["U2"] = env.u2;
  doc["U3"] = env.u3;
  doc["U4"] = env.u4;
  doc["D1"] = env.d1;
  doc["D2"] = env.d2;
  doc["B1"] = env.b1;
  doc["F1"] = env.f1;
  doc["C"] = env.scale_c;
  doc["D"] = env.dual_scale_d;
  doc["eta_paper"] = env.eta_paper;
  if (std::isinf(env.lambda_cap))
    doc["lambda_cap"] = "inf";
  else
    doc["lambda_cap"] = env.lambda_cap;
  doc["condition2_threshold"] = env.condition2_threshold;
  doc["condition2_holds"] = env.condition2_holds;
  return doc;
}

}  // namespace pdbps
