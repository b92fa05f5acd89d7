#pragma once

namespace compton {

// Applies the THREADS environment variable (if set) as the OpenMP thread cap.
// Returns the number of threads in effect.
int configure_threads_from_env();

void set_threads(int n);
int max_threads();

}  // namespace compton
