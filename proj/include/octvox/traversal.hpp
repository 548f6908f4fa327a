// Precomputed near-to-far traversal of candidate subvoxels around a query
// subvoxel. The enumeration region is the cube of subvoxels whose offsets are
// at most h = max(1, floor(r_max/r_s)) per axis; entries are grouped by their
// exact cube-to-cube distance and groups are ordered by increasing distance.
//
// Distances are handled as exact integer squared gaps (units of r_s^2), so
// group identity never depends on floating point. A search restricted to
// this list is provably exact against a whole-map scan for any query radius
// strictly below coverage_radius() = h * r_s; at larger radii, candidates in
// the clipped cube corners beyond the region can be missed.
//
// The list is built once for the canonical subvoxel (octant 0 of the origin
// voxel) and mapped to any query octant by reflect_entry(): axis sign flips
// on the voxel offset plus an XOR on the subvoxel index.
#pragma once

#include "octvox/voxel_key.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace octvox {

struct OffsetEntry {
  Eigen::Vector3i dk{0, 0, 0};  // voxel offset relative to the query voxel
  std::uint8_t s = 0;           // subvoxel index within that voxel
};

struct Group {
  double bound = 0.0;               // r_s * sqrt(bound_sq_units)
  std::int64_t bound_sq_units = 0;  // squared gap in subvoxel units, exact
  std::vector<OffsetEntry> entries; // lexicographic by (dkx, dky, dkz, s)
};

/// Exact squared gap between the canonical subvoxel and the one at relative
/// subvoxel offset u, in units of r_s^2: sum of max(|u_a|-1, 0)^2.
std::int64_t squared_gap_units(const Eigen::Vector3i& offset);

/// Minimum Euclidean distance between the vertex sets of two subvoxel cubes
/// separated by the given offset (in subvoxel units), scaled by r_s. Equals
/// r_s * sqrt(squared_gap_units(offset)) for axis-aligned grid cubes.
double subvoxel_distance(const Eigen::Vector3i& offset, double r_s);

/// Eq.-style octant reflection: flips the sign of dk on every axis where the
/// query octant s_j has its bit set and XORs the subvoxel index with s_j.
OffsetEntry reflect_entry(const OffsetEntry& entry, int s_j);

class TraversalList {
 public:
  /// Enumerates the cube of subvoxels with per-axis offset at most
  /// max(1, floor(r_max/r_s)), grouped by exact distance.
  static TraversalList build(double r_max, double r_s);

  /// Builds a list whose coverage_radius() is at least `radius`, so searches
  /// up to that radius are exact.
  static TraversalList covering(double radius, double r_s);

  const std::vector<Group>& groups() const { return groups_; }
  double r_s() const { return r_s_; }
  double r_max() const { return r_max_; }
  int half_width() const { return half_width_; }
  double coverage_radius() const { return half_width_ * r_s_; }
  std::size_t total_entries() const;

  /// One line per entry: group_index,bound_sq_int,dkx,dky,dkz,s.
  void dump(std::ostream& os) const;

 private:
  std::vector<Group> groups_;
  double r_s_ = 0.0;
  double r_max_ = 0.0;
  int half_width_ = 0;
};

/// Relative subvoxel offset addressed by an entry (inverse of the
/// entry construction: u = 2*dk + bits(s)).
inline Eigen::Vector3i entry_subvoxel_offset(const OffsetEntry& e) {
  return {2 * e.dk.x() + (e.s & 1), 2 * e.dk.y() + ((e.s >> 1) & 1),
          2 * e.dk.z() + ((e.s >> 2) & 1)};
}

}  // namespace octvox
