#pragma once

namespace cdiff {

// Keeps freed large buffers in the heap instead of returning them to the OS.
// Batched network passes allocate multi-megabyte temporaries every step, and
// with the default glibc thresholds each one is a fresh mmap plus page faults.
void tune_allocator();

}  // namespace cdiff
