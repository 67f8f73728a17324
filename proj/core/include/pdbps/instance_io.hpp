#pragma once

#include <string>

#include <json.hpp>

#include "pdbps/cmdp.hpp"

namespace pdbps {

/// JSON schema (documented in the README):
/// {
///   "layers": [[0], [1, 2], [3]],
///   "num_actions": 2,
///   "num_constraints": 1,
///   "kernel": { "0": { "0": { "1": 0.3, "2": 0.7 }, ... }, ... }
/// }
/// Kernel maps state id -> action -> next state id -> probability. Omitted
/// next states carry probability zero. Round trips are lossless at full
/// double precision.
nlohmann::json instance_to_json(const LoopFreeCmdp& mdp);
LoopFreeCmdp instance_from_json(const nlohmann::json& doc);

void save_instance(const LoopFreeCmdp& mdp, const std::string& path);
LoopFreeCmdp load_instance(const std::string& path);

}  // namespace pdbps
