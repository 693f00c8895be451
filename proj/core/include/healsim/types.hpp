#pragma once

#include <cstdint>

namespace healsim {

/// Node identifier. Unique for the lifetime of a run; ids of crashed or
/// churned-out nodes are never reused.
using NodeId = std::uint64_t;

}  // namespace healsim
