#include "igo/parallel.hpp"

#include <cstdlib>
#include <string>

namespace igo {

int default_thread_count() {
  if (const char* env = std::getenv("IGO_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
      // fall through to hardware default on unparsable values
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace igo
