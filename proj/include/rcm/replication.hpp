#pragma once

#include <cstdint>

#include "rcm/random.hpp"

namespace rcm {

/// Seeds used inside replication `index` of a run with master seed `seed`.
///
/// Every estimator draws replication r from child_seed(seed, r), so two runs with
/// the same seed see the same point field and the same edge marks replication by
/// replication (common random numbers). That is what makes the coupling checks exact.
struct ReplicationSeeds {
    std::uint64_t points;
    std::uint64_t edges;
    std::uint64_t extra;

    static constexpr ReplicationSeeds of(std::uint64_t seed, std::uint64_t index) noexcept
    {
        const std::uint64_t rep = child_seed(seed, index);
        return {child_seed(rep, 0), child_seed(rep, 1), child_seed(rep, 2)};
    }
};

} // namespace rcm
