#ifndef FRONTIER_PARALLEL_HPP
#define FRONTIER_PARALLEL_HPP

#include <cstdint>
#include <exception>
#include <functional>
#include <vector>

namespace frontier {

/// splitmix64 finaliser applied to base ^ stream. Replicate r of a run
/// seeded with s draws from std::mt19937_64(derive_seed(s, r)).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Worker count used when a call passes threads = 0. Initially the number
/// of hardware threads.
void set_default_threads(int threads);
int default_threads();

/// Runs body(i) for i in [0, count). Each index is handled exactly once,
/// so results written to slot i do not depend on the thread count. The
/// returned vector holds the exception (if any) thrown for each index.
std::vector<std::exception_ptr> parallel_for(int count, const std::function<void(int)>& body, int threads = 0);

}  // namespace frontier

#endif  // FRONTIER_PARALLEL_HPP
