#pragma once

#include <cstdint>

namespace tsnsim {

/// Simulated true time, nanoseconds since the simulation epoch. Clock
/// readings use the same representation.
using SimTime = std::uint64_t;

/// Signed span of nanoseconds.
using Duration = std::int64_t;

__extension__ using Int128 = __int128;
__extension__ using UInt128 = unsigned __int128;

inline constexpr Duration kNsPerUs = 1'000;
inline constexpr Duration kNsPerMs = 1'000'000;
inline constexpr Duration kNsPerSec = 1'000'000'000;

} // namespace tsnsim
