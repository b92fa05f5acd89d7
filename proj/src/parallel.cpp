#include "compton/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace compton {

int configure_threads_from_env() {
  if (const char* s = std::getenv("THREADS")) {
    try {
      int n = std::stoi(s);
      if (n > 0) omp_set_num_threads(n);
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace compton
