#pragma once

// Execution-policy switch for the OpenMP kernels. The parallel paths are
// written so that every output entry is computed with a fixed summation
// order, independent of the thread count; results are bit-identical
// between serial and parallel execution of the same kernel.

namespace vmma::exec {

enum class Mode { serial, parallel };

Mode mode() noexcept;
void set_mode(Mode m) noexcept;

// Convenience for `#pragma omp parallel for if(...)` clauses.
bool parallel() noexcept;

} // namespace vmma::exec
