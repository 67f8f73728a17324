#include "pdbps/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace pdbps {

using nlohmann::json;

namespace {

Scenario::Kind parse_kind(const json& section, const std::string& which) {
  const auto kind = section.at("kind").get<std::string>();
  if (kind == "stochastic") {
    const auto dist = section.value("dist", std::string("bernoulli"));
    if (dist == "bernoulli") return Scenario::Kind::StochasticBernoulli;
    if (dist == "beta") return Scenario::Kind::StochasticBeta;
    throw ValidationError("scenario: unknown dist '" + dist + "' in " + which);
  }
  if (kind == "adversarial") {
    const auto gen = section.at("generator").get<std::string>();
    if (gen == "periodic_flip") return Scenario::Kind::PeriodicFlip;
    if (gen == "piecewise") return Scenario::Kind::Piecewise;
    if (gen == "sequence") return Scenario::Kind::Sequence;
    if (gen == "adaptive_dip") return Scenario::Kind::AdaptiveDip;
    throw ValidationError("scenario: unknown generator '" + gen + "' in " + which);
  }
  throw ValidationError("scenario: unknown kind '" + kind + "' in " + which);
}

std::vector<double> flatten_constraint_phase(const json& phase, int m, int pairs,
                                             const std::string& which) {
  auto rows = phase.get<std::vector<std::vector<double>>>();
  if (static_cast<int>(rows.size()) != m)
    throw ValidationError("scenario: " + which + " phase must have one row per constraint");
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m) * pairs);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != pairs)
      throw ValidationError("scenario: " + which + " row size must equal the pair count");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return flat;
}

}  // namespace

Scenario Scenario::from_json(const LoopFreeCmdp& mdp, const json& doc) {
  Scenario s;
  s.mdp_ = &mdp;
  const int pairs = mdp.num_pairs();
  const int m = mdp.num_constraints();

  const auto& rdoc = doc.at("rewards");
  s.reward_kind_ = parse_kind(rdoc, "rewards");
  switch (s.reward_kind_) {
    case Kind::StochasticBernoulli:
    case Kind::StochasticBeta:
      s.reward_means_ = rdoc.at("means").get<std::vector<double>>();
      if (static_cast<int>(s.reward_means_.size()) != pairs)
        throw ValidationError("scenario: rewards.means size must equal the pair count");
      for (double mu : s.reward_means_)
        if (!(mu >= 0.0 && mu <= 1.0))
          throw ValidationError("scenario: rewards.means entries must lie in [0,1]");
      s.beta_concentration_ = rdoc.value("concentration", 8.0);
      break;
    case Kind::PeriodicFlip:
      s.reward_period_ = rdoc.at("period").get<long>();
      if (s.reward_period_ <= 0) throw ValidationError("scenario: rewards.period must be positive");
      [[fallthrough]];
    case Kind::Sequence:
      s.reward_phases_ = rdoc.at(s.reward_kind_ == Kind::Sequence ? "values" : "phases")
                             .get<std::vector<std::vector<double>>>();
      break;
    case Kind::Piecewise:
      s.reward_breakpoints_ = rdoc.at("breakpoints").get<std::vector<long>>();
      s.reward_phases_ = rdoc.at("phases").get<std::vector<std::vector<double>>>();
      if (s.reward_breakpoints_.size() != s.reward_phases_.size())
        throw ValidationError("scenario: rewards.breakpoints and phases must align");
      break;
    case Kind::AdaptiveDip:
      s.reward_means_ = rdoc.at("base").get<std::vector<double>>();
      s.adaptive_depth_ = rdoc.value("depth", 0.5);
      if (static_cast<int>(s.reward_means_.size()) != pairs)
        throw ValidationError("scenario: rewards.base size must equal the pair count");
      break;
  }
  if (s.reward_kind_ == Kind::PeriodicFlip || s.reward_kind_ == Kind::Sequence ||
      s.reward_kind_ == Kind::Piecewise) {
    if (s.reward_phases_.empty()) throw ValidationError("scenario: rewards needs phases/values");
    for (const auto& phase : s.reward_phases_) {
      if (static_cast<int>(phase.size()) != pairs)
        throw ValidationError("scenario: rewards phase size must equal the pair count");
      for (double r : phase)
        if (!(r >= 0.0 && r <= 1.0))
          throw ValidationError("scenario: rewards entries must lie in [0,1]");
    }
  }

  const auto& cdoc = doc.at("constraints");
  s.constraint_kind_ = parse_kind(cdoc, "constraints");
  switch (s.constraint_kind_) {
    case Kind::StochasticBernoulli: {
      s.constraint_means_ = flatten_constraint_phase(cdoc.at("means"), m, pairs, "constraints");
      for (double mu : s.constraint_means_)
        if (!(mu >= -1.0 && mu <= 1.0))
          throw ValidationError("scenario: constraints.means entries must lie in [-1,1]");
      break;
    }
    case Kind::PeriodicFlip:
      s.constraint_period_ = cdoc.at("period").get<long>();
      if (s.constraint_period_ <= 0)
        throw ValidationError("scenario: constraints.period must be positive");
      for (const auto& phase : cdoc.at("phases"))
        s.constraint_phases_.push_back(flatten_constraint_phase(phase, m, pairs, "constraints"));
      break;
    case Kind::Piecewise:
      s.constraint_breakpoints_ = cdoc.at("breakpoints").get<std::vector<long>>();
      for (const auto& phase : cdoc.at("phases"))
        s.constraint_phases_.push_back(flatten_constraint_phase(phase, m, pairs, "constraints"));
      if (s.constraint_breakpoints_.size() != s.constraint_phases_.size())
        throw ValidationError("scenario: constraints.breakpoints and phases must align");
      break;
    case Kind::Sequence:
      for (const auto& phase : cdoc.at("values"))
        s.constraint_phases_.push_back(flatten_constraint_phase(phase, m, pairs, "constraints"));
      break;
    case Kind::StochasticBeta:
    case Kind::AdaptiveDip:
      throw ValidationError("scenario: unsupported constraints kind");
  }
  if (s.constraint_kind_ != Kind::StochasticBernoulli && s.constraint_phases_.empty())
    throw ValidationError("scenario: constraints needs phases/values");
  for (const auto& phase : s.constraint_phases_)
    for (double g : phase)
      if (!(g >= -1.0 && g <= 1.0))
        throw ValidationError("scenario: constraints entries must lie in [-1,1]");
  return s;
}

json Scenario::to_json() const {
  json doc;
  const int pairs = mdp_->num_pairs();
  const int m = mdp_->num_constraints();
  auto nest = [&](const std::vector<double>& flat) {
    json rows = json::array();
    for (int i = 0; i < m; ++i)
      rows.push_back(std::vector<double>(flat.begin() + static_cast<long>(i) * pairs,
                                         flat.begin() + static_cast<long>(i + 1) * pairs));
    return rows;
  };

  json rdoc;
  switch (reward_kind_) {
    case Kind::StochasticBernoulli:
      rdoc = {{"kind", "stochastic"}, {"dist", "bernoulli"}, {"means", reward_means_}};
      break;
    case Kind::StochasticBeta:
      rdoc = {{"kind", "stochastic"},
              {"dist", "beta"},
              {"means", reward_means_},
              {"concentration", beta_concentration_}};
      break;
    case Kind::PeriodicFlip:
      rdoc = {{"kind", "adversarial"},
              {"generator", "periodic_flip"},
              {"period", reward_period_},
              {"phases", reward_phases_}};
      break;
    case Kind::Piecewise:
      rdoc = {{"kind", "adversarial"},
              {"generator", "piecewise"},
              {"breakpoints", reward_breakpoints_},
              {"phases", reward_phases_}};
      break;
    case Kind::Sequence:
      rdoc = {{"kind", "adversarial"}, {"generator", "sequence"}, {"values", reward_phases_}};
      break;
    case Kind::AdaptiveDip:
      rdoc = {{"kind", "adversarial"},
              {"generator", "adaptive_dip"},
              {"base", reward_means_},
              {"depth", adaptive_depth_}};
      break;
  }
  doc["rewards"] = std::move(rdoc);

  json cdoc;
  switch (constraint_kind_) {
    case Kind::StochasticBernoulli:
      cdoc = {{"kind", "stochastic"}, {"means", nest(constraint_means_)}};
      break;
    case Kind::PeriodicFlip: {
      json phases = json::array();
      for (const auto& p : constraint_phases_) phases.push_back(nest(p));
      cdoc = {{"kind", "adversarial"},
              {"generator", "periodic_flip"},
              {"period", constraint_period_},
              {"phases", std::move(phases)}};
      break;
    }
    case Kind::Piecewise: {
      json phases = json::array();
      for (const auto& p : constraint_phases_) phases.push_back(nest(p));
      cdoc = {{"kind", "adversarial"},
              {"generator", "piecewise"},
              {"breakpoints", constraint_breakpoints_},
              {"phases", std::move(phases)}};
      break;
    }
    case Kind::Sequence: {
      json values = json::array();
      for (const auto& p : constraint_phases_) values.push_back(nest(p));
      cdoc = {{"kind", "adversarial"}, {"generator", "sequence"}, {"values", std::move(values)}};
      break;
    }
    default:
      break;
  }
  doc["constraints"] = std::move(cdoc);
  return doc;
}

bool Scenario::rewards_stochastic() const {
  return reward_kind_ == Kind::StochasticBernoulli || reward_kind_ == Kind::StochasticBeta;
}

bool Scenario::constraints_stochastic() const {
  return constraint_kind_ == Kind::StochasticBernoulli;
}

std::size_t Scenario::reward_phase_index(long t) const {
  switch (reward_kind_) {
    case Kind::PeriodicFlip:
      return static_cast<std::size_t>(((t - 1) / reward_period_) % reward_phases_.size());
    case Kind::Piecewise: {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < reward_breakpoints_.size(); ++j)
        if (t >= reward_breakpoints_[j]) idx = j;
      return idx;
    }
    case Kind::Sequence:
      if (t > static_cast<long>(reward_phases_.size()))
        throw StructuralError("scenario: reward sequence shorter than the episode index");
      return static_cast<std::size_t>(t - 1);
    default:
      throw StructuralError("scenario: rewards are not generator-based");
  }
}

std::size_t Scenario::constraint_phase_index(long t) const {
  switch (constraint_kind_) {
    case Kind::PeriodicFlip:
      return static_cast<std::size_t>(((t - 1) / constraint_period_) %
                                      constraint_phases_.size());
    case Kind::Piecewise: {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < constraint_breakpoints_.size(); ++j)
        if (t >= constraint_breakpoints_[j]) idx = j;
      return idx;
    }
    case Kind::Sequence:
      if (t > static_cast<long>(constraint_phases_.size()))
        throw StructuralError("scenario: constraint sequence shorter than the episode index");
      return static_cast<std::size_t>(t - 1);
    default:
      throw StructuralError("scenario: constraints are not generator-based");
  }
}

RewardVector Scenario::reward_at(long t, RngStream& rng, const Policy* policy) const {
  const int pairs = mdp_->num_pairs();
  std::vector<double> r(pairs, 0.0);
  switch (reward_kind_) {
    case Kind::StochasticBernoulli:
      for (int p = 0; p < pairs; ++p) r[p] = rng.bernoulli(reward_means_[p]) ? 1.0 : 0.0;
      break;
    case Kind::StochasticBeta:
      for (int p = 0; p < pairs; ++p) {
        const double mu = std::clamp(reward_means_[p], 1e-9, 1.0 - 1e-9);
        r[p] = rng.beta(mu * beta_concentration_, (1.0 - mu) * beta_concentration_);
      }
      break;
    case Kind::AdaptiveDip: {
      if (policy == nullptr)
        throw StructuralError("scenario: adaptive rewards need the current policy");
      for (int p = 0; p < pairs; ++p)
        r[p] = std::clamp(reward_means_[p] - adaptive_depth_ * policy->probs[p], 0.0, 1.0);
      break;
    }
    default:
      r = reward_phases_[reward_phase_index(t)];
      break;
  }
  return RewardVector(std::move(r));
}

ConstraintMatrix Scenario::constraints_at(long t, RngStream& rng) const {
  const int m = mdp_->num_constraints();
  if (constraint_kind_ == Kind::StochasticBernoulli) {
    std::vector<double> g(constraint_means_.size(), 0.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      // Shifted coin on {-1, +1} with the configured mean.
      const double p_plus = 0.5 * (1.0 + constraint_means_[j]);
      g[j] = rng.bernoulli(p_plus) ? 1.0 : -1.0;
    }
    return ConstraintMatrix(m, std::move(g));
  }
  return ConstraintMatrix(m, constraint_phases_[constraint_phase_index(t)]);
}

RewardVector Scenario::mean_reward(long num_episodes) const {
  if (rewards_stochastic()) return RewardVector(reward_means_);
  if (reward_kind_ == Kind::AdaptiveDip)
    throw StructuralError("scenario: adaptive rewards have no closed-form mean");
  std::vector<double> mean(mdp_->num_pairs(), 0.0);
  for (long t = 1; t <= num_episodes; ++t) {
    const auto& phase = reward_phases_[reward_phase_index(t)];
    for (std::size_t p = 0; p < mean.size(); ++p) mean[p] += phase[p];
  }
  for (double& v : mean) v /= static_cast<double>(num_episodes);
  return RewardVector(std::move(mean));
}

ConstraintMatrix Scenario::mean_constraints(long num_episodes) const {
  const int m = mdp_->num_constraints();
  if (constraints_stochastic()) return ConstraintMatrix(m, constraint_means_);
  std::vector<double> mean(static_cast<std::size_t>(m) * mdp_->num_pairs(), 0.0);
  for (long t = 1; t <= num_episodes; ++t) {
    const auto& phase = constraint_phases_[constraint_phase_index(t)];
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += phase[j];
  }
  for (double& v : mean) v /= static_cast<double>(num_episodes);
  return ConstraintMatrix(m, std::move(mean));
}

std::vector<ConstraintMatrix> Scenario::constraint_sequence(long num_episodes) const {
  if (constraints_stochastic())
    throw StructuralError("scenario: stochastic constraints have no fixed sequence");
  std::vector<ConstraintMatrix> out;
  out.reserve(num_episodes);
  for (long t = 1; t <= num_episodes; ++t)
    out.emplace_back(mdp_->num_constraints(), constraint_phases_[constraint_phase_index(t)]);
  return out;
}

}  // namespace pdbps
