#include "sweepsim/parallel.h"

#include <cstdlib>
#include <string>

namespace sweepsim {

unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("SWEEPSIM_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap > 0 && static_cast<unsigned long>(cap) < n) n = static_cast<unsigned>(cap);
    } catch (const std::exception&) {
      // Malformed values are ignored.
    }
  }
  return n;
}

}  // namespace sweepsim
