#include "pdbps/sweep.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace pdbps {

std::vector<RunRecord> seed_sweep(const LoopFreeCmdp& mdp, const Scenario& scenario,
                                  RunConfig base, std::span<const std::uint64_t> seeds,
                                  int num_threads) {
  std::vector<RunRecord> results(seeds.size());
  if (seeds.empty()) return results;
  if (num_threads <= 0)
    num_threads = static_cast<int>(std::max<unsigned>(1, std::thread::hardware_concurrency()));
  num_threads = std::min<int>(num_threads, static_cast<int>(seeds.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        RunConfig config = base;
        config.seed = seeds[i];
        results[i] = run(mdp, scenario, config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(num_threads);
  for (int i = 0; i < num_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace pdbps
