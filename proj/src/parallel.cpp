#include "wide/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace wide {

int num_workers() {
  static const int cached = [] {
    if (const char* env = std::getenv("WIDE_NUM_WORKERS")) {
      try {
        const int n = std::stoi(env);
        if (n >= 1) return n;
      } catch (...) {
      }
    }
    return omp_get_max_threads();
  }();
  return cached;
}

}  // namespace wide
