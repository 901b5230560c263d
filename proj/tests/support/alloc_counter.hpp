#pragma once

#include <cstddef>

namespace wbc::test {

// Counts heap acquisitions made by the calling thread between start and stop.
// The counting hooks replace malloc and friends for the whole test binary.
void startCountingAllocations();
std::size_t stopCountingAllocations();

}  // namespace wbc::test
