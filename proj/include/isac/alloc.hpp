#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace isac {

// Batch activations are hundreds of MB; keep glibc from returning them to the
// OS (and re-faulting the pages) after every layer.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace isac
