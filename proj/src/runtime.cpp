#include "cdiff/runtime.hpp"

#if __has_include(<malloc.h>)
#include <malloc.h>
#endif

namespace cdiff {

void tune_allocator() {
#if defined(M_TOP_PAD)
  mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 1024 * 1024 * 1024);
  mallopt(M_TOP_PAD, 256 * 1024 * 1024);
#endif
}

}  // namespace cdiff
