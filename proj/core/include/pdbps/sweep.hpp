#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdbps/meta.hpp"

namespace pdbps {

/// Runs one learning run per seed on a worker pool. Results come back
/// indexed by seed position, so the output is independent of scheduling;
/// each worker owns its run state. `num_threads <= 0` uses the hardware
/// concurrency.
std::vector<RunRecord> seed_sweep(const LoopFreeCmdp& mdp, const Scenario& scenario,
                                  RunConfig base, std::span<const std::uint64_t> seeds,
                                  int num_threads = 0);

}  // namespace pdbps
