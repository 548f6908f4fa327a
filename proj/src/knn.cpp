#include "octvox/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace octvox {

namespace {

// Total order: distance, then origin key, then subvoxel index.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  if (!(a.key == b.key)) return a.key < b.key;
  return a.s < b.s;
}

}  // namespace

std::vector<Neighbor> knn_search(const OctVoxMap& map, const TraversalList& list,
                                 const Vec3& query, int k, double radius,
                                 const SearchOptions& opts) {
  if (k < 1) throw std::invalid_argument("knn_search: k must be at least 1");
  if (!(radius > 0.0) || radius > list.r_max())
    throw std::invalid_argument("knn_search: radius must be in (0, r_max]");
  const double r_s = list.r_s();
  if (std::abs(map.subvoxel_size() - r_s) > 1e-12 * std::max(1.0, r_s))
    throw std::invalid_argument("knn_search: map and traversal list disagree on r_s");

  const auto [qkey, qs] = subvoxel_index(query, r_s);

  SearchStats stats;
  std::vector<Neighbor> heap;  // max-heap under neighbor_less
  heap.reserve(std::size_t(k));

  for (const Group& group : list.groups()) {
    if (group.bound > radius) break;
    if (opts.early_termination && heap.size() == std::size_t(k) &&
        heap.front().dist < group.bound) {
      stats.terminated_early = true;
      break;
    }
    ++stats.groups_visited;
    for (const OffsetEntry& entry : group.entries) {
      const OffsetEntry r = reflect_entry(entry, qs);
      const std::int64_t kx = std::int64_t(qkey.x) + r.dk.x();
      const std::int64_t ky = std::int64_t(qkey.y) + r.dk.y();
      const std::int64_t kz = std::int64_t(qkey.z) + r.dk.z();
      if (kx < INT32_MIN || kx > INT32_MAX || ky < INT32_MIN || ky > INT32_MAX ||
          kz < INT32_MIN || kz > INT32_MAX)
        continue;  // beyond the representable grid; nothing can be stored there
      const VoxelKey ckey{std::int32_t(kx), std::int32_t(ky), std::int32_t(kz)};
      const OctVoxel* voxel = map.find_voxel(ckey);
      if (voxel == nullptr) continue;
      if (opts.touched) opts.touched->push_back(ckey);
      const SubVoxelRecord& slot = voxel->slots[r.s];
      if (slot.n == 0) continue;
      ++stats.candidates_evaluated;
      const double dist = (query - slot.mu).norm();
      if (dist > radius) continue;
      Neighbor cand{slot.mu, dist, ckey, int(r.s)};
      if (heap.size() < std::size_t(k)) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), neighbor_less);
      } else if (neighbor_less(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), neighbor_less);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), neighbor_less);
      }
    }
  }

  std::sort(heap.begin(), heap.end(), neighbor_less);
  if (opts.stats) *opts.stats = stats;
  return heap;
}

std::vector<Neighbor> brute_force_knn(const OctVoxMap& map, const Vec3& query,
                                      int k, double radius) {
  if (k < 1) throw std::invalid_argument("brute_force_knn: k must be at least 1");
  if (!(radius > 0.0)) throw std::invalid_argument("brute_force_knn: radius must be positive");
  std::vector<Neighbor> found;
  map.for_each_slot([&](const VoxelKey& key, int s, const SubVoxelRecord& rec) {
    const double dist = (query - rec.mu).norm();
    if (dist <= radius) found.push_back(Neighbor{rec.mu, dist, key, s});
  });
  std::sort(found.begin(), found.end(), neighbor_less);
  if (found.size() > std::size_t(k)) found.resize(std::size_t(k));
  return found;
}

}  // namespace octvox
