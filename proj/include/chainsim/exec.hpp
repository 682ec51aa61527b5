#pragma once

namespace chainsim {

// Execution policy for the per-vehicle kernels. Serial is the reference
// implementation; Parallel runs the same kernel under OpenMP. Outputs are
// bit-identical between the two: every loop iteration writes only its own
// slots and reductions are performed in fixed index order.
enum class Exec { Serial, Parallel };

}  // namespace chainsim
