// Exact top-K nearest-neighbor search over the octo-voxel map.
//
// knn_search walks the traversal list's distance groups near-to-far,
// reflecting each entry into the query's octant, and keeps the current top-K
// in a bounded max-heap. Once the heap is full and its worst distance is
// strictly below the next group's lower bound, no unvisited candidate can
// improve the result and the search stops.
//
// Ties are broken by ascending (voxel key, subvoxel index) of the candidate's
// origin so results are bit-reproducible and comparable against the
// brute-force oracle.
#pragma once

#include "octvox/octvox_map.hpp"
#include "octvox/traversal.hpp"

#include <cstdint>
#include <vector>

namespace octvox {

struct Neighbor {
  Vec3 mu{Vec3::Zero()};
  double dist = 0.0;
  VoxelKey key;  // origin voxel of the representative
  int s = 0;     // origin subvoxel index
};

struct SearchStats {
  std::size_t candidates_evaluated = 0;  // occupied slots whose distance was computed
  std::size_t groups_visited = 0;
  bool terminated_early = false;
};

struct SearchOptions {
  bool early_termination = true;
  std::vector<VoxelKey>* touched = nullptr;  // records visited occupied voxels
  SearchStats* stats = nullptr;
};

/// Exact top-K within radius `radius` (ascending distance, deterministic tie
/// break). Throws std::invalid_argument for k < 1 or radius outside
/// (0, list.r_max()]. May return fewer than k neighbors.
std::vector<Neighbor> knn_search(const OctVoxMap& map, const TraversalList& list,
                                 const Vec3& query, int k, double radius,
                                 const SearchOptions& opts = {});

/// Oracle: scans every occupied slot in the map, filters by radius, sorts by
/// (distance, origin key, s), truncates to k.
std::vector<Neighbor> brute_force_knn(const OctVoxMap& map, const Vec3& query,
                                      int k, double radius);

}  // namespace octvox
