// Octo-voxel map: a hashed voxel grid where every voxel holds exactly eight
// subvoxel representatives, each an incrementally averaged point with a
// counter. Gated mean updates bound the averaging range, the per-voxel slot
// count bounds density, and an LRU policy bounds the total voxel count.
//
// Concurrency contract: reads (lookups, searches) never mutate the map and may
// run concurrently. Mutation (inserts, touch flushes, eviction) happens in an
// exclusive write phase. Queries that want to refresh recency record the keys
// they visited and hand them to flush_touches() during the write phase.
#pragma once

#include "octvox/geom.hpp"
#include "octvox/voxel_key.hpp"
#include "octvox/voxel_table.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace octvox {

struct SubVoxelRecord {
  Vec3 mu{Vec3::Zero()};
  std::uint32_t n = 0;  // 0 means uninitialized
};

struct OctVoxel {
  std::array<SubVoxelRecord, 8> slots{};
  std::uint64_t recency = 0;
};

struct MapConfig {
  double voxel_size = 0.5;     // r_v, meters
  double tau_merge = 0.1;      // gating distance for mean updates, meters
  std::uint32_t n_max = 100;   // counter saturation bound
  std::size_t capacity = 2'000'000;  // max live voxels

  double subvoxel_size() const { return 0.5 * voxel_size; }
};

enum class InsertOutcome { kInitialized, kMerged, kRejectedGate, kRejectedSaturated };

struct BatchStats {
  std::size_t initialized = 0;
  std::size_t merged = 0;
  std::size_t rejected_gate = 0;
  std::size_t rejected_saturated = 0;
  std::size_t evicted = 0;
};

class OctVoxMap {
 public:
  explicit OctVoxMap(const MapConfig& cfg = {});

  /// Inserts one world-frame point. Initializes the slot if empty; otherwise
  /// applies the gated incremental mean update. Stamps the voxel's recency and
  /// evicts the least recently used voxel first if a new voxel would exceed
  /// capacity.
  InsertOutcome insert_point(const Vec3& p);

  /// Sequential insert_point over a batch, with outcome counts.
  BatchStats insert_scan(std::span<const Vec3> points);

  /// Slot content if the voxel exists and the slot is initialized. Does not
  /// stamp recency (read path).
  std::optional<SubVoxelRecord> representative(const VoxelKey& key, int s) const;

  /// Read-only voxel lookup; nullptr when absent. Does not stamp recency.
  const OctVoxel* find_voxel(const VoxelKey& key) const { return table_.find(key); }

  /// Evicts least-recently-stamped voxels while the count exceeds capacity.
  std::size_t evict_to_capacity();

  /// Write-phase recency refresh for keys recorded during the read phase.
  /// Keys are stamped in sorted order, each with a fresh clock value.
  void flush_touches(std::vector<VoxelKey> keys);

  void set_capacity(std::size_t capacity) { cfg_.capacity = capacity; }

  std::size_t voxel_count() const { return table_.size(); }
  std::size_t occupied_slots() const { return occupied_slots_; }
  std::uint64_t eviction_count() const { return evictions_; }
  const MapConfig& config() const { return cfg_; }
  double subvoxel_size() const { return cfg_.subvoxel_size(); }

  template <class F>
  void for_each_slot(F&& f) const {
    table_.for_each([&](const VoxelKey& key, const OctVoxel& v) {
      for (int s = 0; s < 8; ++s)
        if (v.slots[s].n > 0) f(key, s, v.slots[s]);
    });
  }

  /// One line per occupied slot: kx,ky,kz,s,mux,muy,muz,n (sorted by key, s).
  void write_snapshot(std::ostream& os) const;

  std::vector<std::size_t> probe_histogram() const { return table_.probe_histogram(); }

 private:
  void stamp(OctVoxel& voxel, const VoxelKey& key);
  void evict_lru();

  MapConfig cfg_;
  VoxelTable<OctVoxel> table_;
  std::map<std::uint64_t, VoxelKey> recency_;  // stamp -> key; stamps are unique
  std::uint64_t clock_ = 0;
  std::uint64_t evictions_ = 0;
  std::size_t occupied_slots_ = 0;
};

}  // namespace octvox
