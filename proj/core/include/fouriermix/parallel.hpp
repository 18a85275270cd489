#pragma once

#include <cstddef>
#include <functional>

namespace fouriermix {

// Process-wide worker count used by parallel_for. 0 selects hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Work is handed out dynamically, so callers must
// write results by index; the first exception thrown by any worker is rethrown
// after all workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace fouriermix
