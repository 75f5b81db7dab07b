#pragma once

#include <cstdint>

#include "mdfl/data/dataset.hpp"

namespace mdfl {

struct PartitionConfig {
    int target_users = 0;
    std::uint64_t seed = 0;

    bool operator==(const PartitionConfig&) const = default;
};

/// Class-based partitioning into target_users users.
///
/// With N original users and m = floor(N'/N), each original user's windows
/// of every class are cut into contiguous time chunks (m chunks, or m + 1
/// when N' is not a multiple of N). The original user keeps chunk 0 plus any
/// per-class leftover. Rotation slot j (1..m-1) creates N new users; new
/// user (j, o) takes, for class c, chunk j of original user (o + c) mod N on
/// every one of that user's devices. A trailing partial slot creates the
/// remaining N' - N*m users the same way; chunks nobody claims go back to
/// their original user.
///
/// Output users are numbered 0..N'-1 (originals first, then slot by slot)
/// and device k of every user keeps position k. Original users keep their
/// timestamp indices; new users get fresh ones in (class, source time) order.
/// N' == N returns the input unchanged.
///
/// The seed is recorded for provenance only; the assignment is fully
/// determined by the rotation rule.
MultiDeviceDataset partition(const MultiDeviceDataset& ds, const PartitionConfig& cfg);

}  // namespace mdfl
