#pragma once

namespace polarpref {

/// Selects the reference (single-threaded) or OpenMP path of a kernel. Both
/// paths produce identical results; the serial one is kept as the oracle.
enum class Exec { serial, parallel };

/// Sets the OpenMP thread count for subsequent parallel kernels (<= 0 keeps
/// the runtime default).
void set_worker_count(int n);
int worker_count();

}  // namespace polarpref
