#include "octvox/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace octvox {

std::int64_t squared_gap_units(const Eigen::Vector3i& offset) {
  std::int64_t q = 0;
  for (int a = 0; a < 3; ++a) {
    const std::int64_t gap = std::max<std::int64_t>(std::abs(std::int64_t(offset[a])) - 1, 0);
    q += gap * gap;
  }
  return q;
}

double subvoxel_distance(const Eigen::Vector3i& offset, double r_s) {
  if (r_s <= 0.0) throw std::invalid_argument("r_s must be positive");
  return r_s * std::sqrt(double(squared_gap_units(offset)));
}

OffsetEntry reflect_entry(const OffsetEntry& entry, int s_j) {
  OffsetEntry out;
  out.dk.x() = (s_j & 1) ? -entry.dk.x() : entry.dk.x();
  out.dk.y() = (s_j & 2) ? -entry.dk.y() : entry.dk.y();
  out.dk.z() = (s_j & 4) ? -entry.dk.z() : entry.dk.z();
  out.s = std::uint8_t(entry.s ^ s_j);
  return out;
}

TraversalList TraversalList::build(double r_max, double r_s) {
  if (r_s <= 0.0) throw std::invalid_argument("r_s must be positive");
  if (r_max < 0.0) throw std::invalid_argument("r_max must be nonnegative");

  TraversalList list;
  list.r_s_ = r_s;
  list.r_max_ = r_max;
  // Never search less than the touching shell (all distance-0 neighbors).
  const int h = std::max(1, int(std::floor(r_max / r_s + 1e-12)));
  list.half_width_ = h;

  std::map<std::int64_t, std::vector<OffsetEntry>> buckets;
  for (int ux = -h; ux <= h; ++ux)
    for (int uy = -h; uy <= h; ++uy)
      for (int uz = -h; uz <= h; ++uz) {
        const Eigen::Vector3i u(ux, uy, uz);
        OffsetEntry e;
        e.dk = {ux >> 1, uy >> 1, uz >> 1};
        e.s = std::uint8_t((ux & 1) | ((uy & 1) << 1) | ((uz & 1) << 2));
        buckets[squared_gap_units(u)].push_back(e);
      }

  list.groups_.reserve(buckets.size());
  for (auto& [sq, entries] : buckets) {
    std::sort(entries.begin(), entries.end(), [](const OffsetEntry& a, const OffsetEntry& b) {
      return std::tie(a.dk.x(), a.dk.y(), a.dk.z(), a.s) <
             std::tie(b.dk.x(), b.dk.y(), b.dk.z(), b.s);
    });
    Group g;
    g.bound_sq_units = sq;
    g.bound = r_s * std::sqrt(double(sq));
    g.entries = std::move(entries);
    list.groups_.push_back(std::move(g));
  }
  return list;
}

TraversalList TraversalList::covering(double radius, double r_s) {
  if (r_s <= 0.0) throw std::invalid_argument("r_s must be positive");
  if (radius < 0.0) throw std::invalid_argument("radius must be nonnegative");
  const int h = std::max(1, int(std::ceil(radius / r_s - 1e-12)));
  return build(h * r_s, r_s);
}

std::size_t TraversalList::total_entries() const {
  std::size_t n = 0;
  for (const Group& g : groups_) n += g.entries.size();
  return n;
}

void TraversalList::dump(std::ostream& os) const {
  char line[96];
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    for (const OffsetEntry& e : groups_[gi].entries) {
      std::snprintf(line, sizeof(line), "%zu,%lld,%d,%d,%d,%u\n", gi,
                    (long long)groups_[gi].bound_sq_units, e.dk.x(), e.dk.y(),
                    e.dk.z(), unsigned(e.s));
      os << line;
    }
  }
}

}  // namespace octvox
