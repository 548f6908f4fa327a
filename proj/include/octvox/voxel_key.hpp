// Voxel grid keys, the subvoxel quantization rule, and the key hash.
#pragma once

#include "octvox/geom.hpp"

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace octvox {

struct VoxelKey {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
  // Lexicographic (x, y, z); used for deterministic tie-breaks.
  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

// Large-prime multiply-and-xor mix of the three coordinates, followed by an
// avalanche finalizer, producing the 64-bit slot index.
inline std::uint64_t hash_key(const VoxelKey& k) {
  std::uint64_t h = std::uint64_t(std::uint32_t(k.x)) * 0x9E3779B97F4A7C15ull;
  h ^= std::uint64_t(std::uint32_t(k.y)) * 0xC2B2AE3D27D4EB4Full;
  h ^= std::uint64_t(std::uint32_t(k.z)) * 0xD6E8FEB86659FD93ull;
  h ^= h >> 30;
  h *= 0xBF58476D1CE4E5B9ull;
  h ^= h >> 27;
  h *= 0x94D049BB133111EBull;
  h ^= h >> 31;
  return h;
}

/// Quantizes a world point to subvoxel resolution r_s: returns the parent
/// voxel key and the octant index s in [0, 7]. Floor semantics hold for
/// negative coordinates; the arithmetic right shift realizes floor-div-2 and
/// the AND realizes a nonnegative mod-2, so the whole computation is
/// branch-free.
inline std::pair<VoxelKey, int> subvoxel_index(const Vec3& p, double r_s) {
  if (!p.allFinite()) throw std::out_of_range("subvoxel_index: non-finite point");
  const std::int64_t sx = std::int64_t(std::floor(p.x() / r_s));
  const std::int64_t sy = std::int64_t(std::floor(p.y() / r_s));
  const std::int64_t sz = std::int64_t(std::floor(p.z() / r_s));
  const std::int64_t kx = sx >> 1;
  const std::int64_t ky = sy >> 1;
  const std::int64_t kz = sz >> 1;
  constexpr std::int64_t kBound = std::int64_t(INT32_MAX);
  if (kx < -kBound || kx > kBound || ky < -kBound || ky > kBound ||
      kz < -kBound || kz > kBound) {
    throw std::out_of_range("subvoxel_index: voxel key out of world bounds");
  }
  const int s = int(sx & 1) | (int(sy & 1) << 1) | (int(sz & 1) << 2);
  return {VoxelKey{std::int32_t(kx), std::int32_t(ky), std::int32_t(kz)}, s};
}

/// Minimum corner of the subvoxel cube addressed by (key, s).
inline Vec3 subvoxel_min_corner(const VoxelKey& key, int s, double r_s) {
  const std::int64_t cx = 2 * std::int64_t(key.x) + (s & 1);
  const std::int64_t cy = 2 * std::int64_t(key.y) + ((s >> 1) & 1);
  const std::int64_t cz = 2 * std::int64_t(key.z) + ((s >> 2) & 1);
  return Vec3(double(cx) * r_s, double(cy) * r_s, double(cz) * r_s);
}

}  // namespace octvox
