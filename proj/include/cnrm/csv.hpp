#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cnrm {

/// Fixed 17-significant-digit rendering; every finite double round-trips.
std::string fmt17(double x);

/// FNV-1a 64-bit hash, used to stamp output files with their config.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace cnrm
