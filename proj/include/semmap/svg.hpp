#pragma once

#include <cstdint>
#include <filesystem>

#include "semmap/network.hpp"

namespace semmap {

// Static map rendering: force-directed layout per connected component,
// components packed into non-overlapping shelves, nodes colored by
// community and sized by 1 + ln(frequency). Byte-identical output for the
// same network, partition, and seed.
void emit_svg_map(const CowordNetwork& net, const Partition& partition,
                  std::uint64_t seed, const std::filesystem::path& file);

}  // namespace semmap
