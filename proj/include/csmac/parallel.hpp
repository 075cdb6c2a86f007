#pragma once

#include <cstddef>
#include <functional>

namespace csmac {

// Runs fn(i) for i in [0, n). jobs <= 1 selects the serial reference path,
// jobs > 1 the OpenMP path. Callers must make fn(i) independent of execution
// order (per-index seeds, per-index output slots) so both paths agree exactly.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// Number of hardware threads OpenMP would use by default.
int default_jobs();

}  // namespace csmac
