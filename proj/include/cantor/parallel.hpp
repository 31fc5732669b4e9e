#pragma once

namespace cantor {

/// Kernel execution mode. Parallel kernels reduce associatively from
/// per-walk / per-color / per-row state, so both modes produce bit-identical
/// results; Serial is kept as the reference implementation for tests and the
/// benchmark harness.
enum class Exec { Serial, Parallel };

} // namespace cantor
