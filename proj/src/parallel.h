#pragma once

#include <cstddef>
#include <functional>

namespace relevancy {

// Process-wide worker count used by every data-parallel loop; 0 selects the
// hardware concurrency. Work is split into contiguous index ranges and each
// index is computed independently, so results never depend on the worker
// count.
void set_num_threads(int n);
int num_threads();

// Calls body(begin, end) over disjoint subranges covering [0, n). Nested calls
// from inside a worker run serially on that worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1);

}  // namespace relevancy
