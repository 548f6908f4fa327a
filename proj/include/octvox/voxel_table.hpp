// Open-addressed Robin Hood hash table keyed by VoxelKey.
//
// Slots are grouped into buckets of eight; probing advances bucket by bucket
// and displacement is counted in buckets. Within a full bucket the poorest
// resident (smallest displacement) is swapped out, Robin Hood style. Keys and
// displacement metadata live in their own array so a probe touches two cache
// lines per bucket regardless of value size.
//
// Invariant: an entry stored with bucket displacement d implies every bucket
// between its home bucket and its current one is completely full. Lookups may
// therefore stop at the first bucket containing an empty slot; erases repair
// the invariant by pulling displaced entries backwards.
#pragma once

#include "octvox/voxel_key.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace octvox {

template <class Value>
class VoxelTable {
 public:
  static constexpr std::size_t kBucketSlots = 8;

  explicit VoxelTable(std::size_t min_slots = 64) {
    std::size_t buckets = 8;
    while (buckets * kBucketSlots < min_slots) buckets <<= 1;
    meta_.assign(buckets * kBucketSlots, Meta{});
    vals_.assign(buckets * kBucketSlots, Value{});
    nbuckets_ = buckets;
  }

  std::size_t size() const { return size_; }
  std::size_t slot_count() const { return nbuckets_ * kBucketSlots; }
  double load_factor() const { return double(size_) / double(slot_count()); }

  const Value* find(const VoxelKey& key) const {
    const std::size_t idx = find_slot(key);
    return idx == kNone ? nullptr : &vals_[idx];
  }
  Value* find(const VoxelKey& key) {
    const std::size_t idx = find_slot(key);
    return idx == kNone ? nullptr : &vals_[idx];
  }

  /// Returns the value for key, inserting a default-constructed one if absent.
  Value& find_or_create(const VoxelKey& key, bool* created = nullptr) {
    const std::size_t idx = find_slot(key);
    if (idx != kNone) {
      if (created) *created = false;
      return vals_[idx];
    }
    if (created) *created = true;
    if (double(size_ + 1) > kMaxLoad * double(slot_count())) grow();
    insert_new(key, Value{});
    ++size_;
    return vals_[find_slot(key)];
  }

  bool erase(const VoxelKey& key) {
    const std::size_t idx = find_slot(key);
    if (idx == kNone) return false;
    const std::size_t bucket = idx / kBucketSlots;
    const bool was_full = bucket_full(bucket);
    meta_[idx].dib = 0;
    vals_[idx] = Value{};
    --size_;
    if (was_full) repair(bucket);
    return true;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < meta_.size(); ++i)
      if (meta_[i].dib != 0) f(meta_[i].key, vals_[i]);
  }

  /// Histogram of bucket displacements of all stored entries.
  std::vector<std::size_t> probe_histogram() const {
    std::vector<std::size_t> hist(max_disp_ + 2, 0);
    for (const Meta& m : meta_)
      if (m.dib != 0) ++hist[m.dib - 1];
    return hist;
  }

  void reserve(std::size_t n) {
    while (double(n) > kMaxLoad * double(slot_count())) grow();
  }

 private:
  struct Meta {
    VoxelKey key;
    std::uint8_t dib = 0;  // bucket displacement + 1; 0 marks an empty slot
  };

  static constexpr std::size_t kNone = ~std::size_t(0);
  static constexpr double kMaxLoad = 0.75;

  std::size_t bucket_mask() const { return nbuckets_ - 1; }

  std::size_t find_slot(const VoxelKey& key) const {
    std::size_t bucket = hash_key(key) & bucket_mask();
    for (std::uint32_t d = 0; d <= max_disp_; ++d) {
      bool saw_empty = false;
      const std::size_t base = bucket * kBucketSlots;
      for (std::size_t i = 0; i < kBucketSlots; ++i) {
        const Meta& m = meta_[base + i];
        if (m.dib == 0) {
          saw_empty = true;
        } else if (m.key == key) {
          return base + i;
        }
      }
      if (saw_empty) return kNone;
      bucket = (bucket + 1) & bucket_mask();
    }
    return kNone;
  }

  bool bucket_full(std::size_t bucket) const {
    const std::size_t base = bucket * kBucketSlots;
    for (std::size_t i = 0; i < kBucketSlots; ++i)
      if (meta_[base + i].dib == 0) return false;
    return true;
  }

  // Places a key known to be absent.
  void insert_new(VoxelKey key, Value value) {
    std::uint32_t dib = 1;
    std::size_t bucket = hash_key(key) & bucket_mask();
    while (true) {
      const std::size_t base = bucket * kBucketSlots;
      std::size_t empty = kNone;
      std::size_t poorest = kNone;
      std::uint32_t poorest_dib = ~0u;
      for (std::size_t i = 0; i < kBucketSlots; ++i) {
        const Meta& m = meta_[base + i];
        if (m.dib == 0) { empty = base + i; break; }
        if (m.dib < poorest_dib) { poorest_dib = m.dib; poorest = base + i; }
      }
      if (empty != kNone) {
        meta_[empty] = Meta{key, std::uint8_t(dib)};
        vals_[empty] = std::move(value);
        if (dib - 1 > max_disp_) max_disp_ = dib - 1;
        return;
      }
      if (poorest_dib < dib) {
        std::swap(meta_[poorest].key, key);
        const std::uint8_t stored = meta_[poorest].dib;
        meta_[poorest].dib = std::uint8_t(dib);
        std::swap(vals_[poorest], value);
        if (dib - 1 > max_disp_) max_disp_ = dib - 1;
        dib = stored;
      }
      bucket = (bucket + 1) & bucket_mask();
      ++dib;
      if (dib >= 250) {  // pathological clustering; rebuild larger
        grow();
        insert_new(key, std::move(value));
        return;
      }
    }
  }

  // Restores the fullness invariant after a slot was emptied in a previously
  // full bucket: pull the nearest displaced entry backwards into the hole,
  // cascading while the donor bucket was itself full.
  void repair(std::size_t hole_bucket) {
    while (true) {
      std::size_t hole_slot = kNone;
      const std::size_t hbase = hole_bucket * kBucketSlots;
      for (std::size_t i = 0; i < kBucketSlots; ++i)
        if (meta_[hbase + i].dib == 0) { hole_slot = hbase + i; break; }
      if (hole_slot == kNone) return;

      std::size_t donor_slot = kNone;
      std::size_t donor_bucket = kNone;
      std::uint32_t donor_j = 0;
      for (std::uint32_t j = 1; j <= max_disp_ && donor_slot == kNone; ++j) {
        const std::size_t c = (hole_bucket + j) & bucket_mask();
        const std::size_t base = c * kBucketSlots;
        std::uint32_t best_dib = 0;
        for (std::size_t i = 0; i < kBucketSlots; ++i) {
          const Meta& m = meta_[base + i];
          if (m.dib != 0 && std::uint32_t(m.dib) >= j + 1 && m.dib > best_dib) {
            best_dib = m.dib;
            donor_slot = base + i;
          }
        }
        if (donor_slot != kNone) { donor_bucket = c; donor_j = j; }
      }
      if (donor_slot == kNone) return;

      const bool donor_was_full = bucket_full(donor_bucket);
      meta_[hole_slot] = Meta{meta_[donor_slot].key,
                              std::uint8_t(meta_[donor_slot].dib - donor_j)};
      vals_[hole_slot] = std::move(vals_[donor_slot]);
      meta_[donor_slot].dib = 0;
      vals_[donor_slot] = Value{};
      if (!donor_was_full) return;
      hole_bucket = donor_bucket;
    }
  }

  void grow() {
    std::vector<Meta> old_meta = std::move(meta_);
    std::vector<Value> old_vals = std::move(vals_);
    nbuckets_ <<= 1;
    meta_.assign(nbuckets_ * kBucketSlots, Meta{});
    vals_.assign(nbuckets_ * kBucketSlots, Value{});
    max_disp_ = 0;
    for (std::size_t i = 0; i < old_meta.size(); ++i)
      if (old_meta[i].dib != 0)
        insert_new(old_meta[i].key, std::move(old_vals[i]));
  }

  std::size_t nbuckets_ = 0;
  std::size_t size_ = 0;
  std::uint32_t max_disp_ = 0;
  std::vector<Meta> meta_;
  std::vector<Value> vals_;
};

}  // namespace octvox
