#pragma once

#include <cstdint>
#include <functional>

namespace ricci {

// Worker count: ENTROPIC_RICCI_THREADS if set and positive, else hardware concurrency.
int worker_count(int requested = 0);

// Runs fn(i) for i in [0, count). Results must be written by index so that the
// outcome does not depend on scheduling. Exceptions are rethrown (lowest index first).
void parallel_for(int count, const std::function<void(int)>& fn, int workers = 0);

// SplitMix64 mixing, used to derive independent per-task seeds from a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

}  // namespace ricci
