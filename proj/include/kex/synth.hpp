#pragma once

#include <cstdint>
#include <string>

#include "kex/io.hpp"

namespace kex {

// Deterministic synthetic datasets. Shapes:
//   swiss-roll     3-D roll, label = roll parameter (monotone in arc length)
//   circles        two concentric circles in 2-D, label = circle index
//   gaussian-blobs three fixed-center 2-D blobs with spread `noise`, label = blob
LoadedData synth_dataset(const std::string& shape, Index n, double noise, std::uint64_t seed);

}  // namespace kex
