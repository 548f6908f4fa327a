#include "octvox/octvox_map.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace octvox {

OctVoxMap::OctVoxMap(const MapConfig& cfg) : cfg_(cfg) {
  if (cfg_.voxel_size <= 0.0) throw std::invalid_argument("voxel_size must be positive");
  if (cfg_.tau_merge < 0.0) throw std::invalid_argument("tau_merge must be nonnegative");
  if (cfg_.capacity < 1) throw std::invalid_argument("capacity must be at least 1");
}

void OctVoxMap::stamp(OctVoxel& voxel, const VoxelKey& key) {
  if (voxel.recency != 0) recency_.erase(voxel.recency);
  voxel.recency = ++clock_;
  recency_.emplace(voxel.recency, key);
}

void OctVoxMap::evict_lru() {
  auto it = recency_.begin();
  const VoxelKey victim = it->second;
  if (const OctVoxel* v = table_.find(victim)) {
    for (const auto& slot : v->slots)
      if (slot.n > 0) --occupied_slots_;
  }
  table_.erase(victim);
  recency_.erase(it);
  ++evictions_;
}

InsertOutcome OctVoxMap::insert_point(const Vec3& p) {
  const auto [key, s] = subvoxel_index(p, cfg_.subvoxel_size());

  OctVoxel* voxel = table_.find(key);
  if (voxel == nullptr) {
    if (table_.size() >= cfg_.capacity) evict_lru();
    voxel = &table_.find_or_create(key);
  }
  stamp(*voxel, key);

  SubVoxelRecord& slot = voxel->slots[s];
  if (slot.n == 0) {
    slot.mu = p;
    slot.n = 1;
    ++occupied_slots_;
    return InsertOutcome::kInitialized;
  }
  if ((p - slot.mu).norm() > cfg_.tau_merge) return InsertOutcome::kRejectedGate;
  if (slot.n > cfg_.n_max) return InsertOutcome::kRejectedSaturated;
  slot.mu += (p - slot.mu) / double(slot.n + 1);
  slot.n += 1;
  return InsertOutcome::kMerged;
}

BatchStats OctVoxMap::insert_scan(std::span<const Vec3> points) {
  BatchStats stats;
  const std::uint64_t evictions_before = evictions_;
  for (const Vec3& p : points) {
    switch (insert_point(p)) {
      case InsertOutcome::kInitialized: ++stats.initialized; break;
      case InsertOutcome::kMerged: ++stats.merged; break;
      case InsertOutcome::kRejectedGate: ++stats.rejected_gate; break;
      case InsertOutcome::kRejectedSaturated: ++stats.rejected_saturated; break;
    }
  }
  stats.evicted = std::size_t(evictions_ - evictions_before);
  return stats;
}

std::optional<SubVoxelRecord> OctVoxMap::representative(const VoxelKey& key, int s) const {
  if (s < 0 || s > 7) throw std::invalid_argument("subvoxel index must be in [0,7]");
  const OctVoxel* voxel = table_.find(key);
  if (voxel == nullptr || voxel->slots[s].n == 0) return std::nullopt;
  return voxel->slots[s];
}

std::size_t OctVoxMap::evict_to_capacity() {
  std::size_t evicted = 0;
  while (table_.size() > cfg_.capacity) {
    evict_lru();
    ++evicted;
  }
  return evicted;
}

void OctVoxMap::flush_touches(std::vector<VoxelKey> keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (const VoxelKey& key : keys)
    if (OctVoxel* voxel = table_.find(key)) stamp(*voxel, key);
}

void OctVoxMap::write_snapshot(std::ostream& os) const {
  std::vector<std::tuple<VoxelKey, int, SubVoxelRecord>> rows;
  rows.reserve(occupied_slots_);
  for_each_slot([&](const VoxelKey& key, int s, const SubVoxelRecord& rec) {
    rows.emplace_back(key, s, rec);
  });
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  char line[160];
  for (const auto& [key, s, rec] : rows) {
    std::snprintf(line, sizeof(line), "%d,%d,%d,%d,%.9g,%.9g,%.9g,%u\n",
                  key.x, key.y, key.z, s, rec.mu.x(), rec.mu.y(), rec.mu.z(), rec.n);
    os << line;
  }
}

}  // namespace octvox
