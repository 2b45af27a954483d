#pragma once

// Exhaustive walk of the anti-collision mask tree. For each mask it filters
// the whole tag list for every one of the 16 slot extensions and recurses
// into any extension matched by two or more tags. Each visited mask is one
// round. Written independently of the breadth-first queue implementation.

#include <algorithm>
#include <cstdint>
#include <vector>

namespace oracle {

struct Singulation {
  std::vector<std::uint64_t> uids;  // ascending
  std::uint32_t rounds = 0;
};

namespace detail {

inline bool low_bits_equal(std::uint64_t a, std::uint64_t b, unsigned bits) {
  if (bits >= 64) return a == b;
  const std::uint64_t mask = bits == 0 ? 0 : ((std::uint64_t{1} << bits) - 1);
  return (a & mask) == (b & mask);
}

inline void walk(const std::vector<std::uint64_t>& tags, std::uint64_t prefix, unsigned bits,
                 Singulation& out) {
  ++out.rounds;
  for (std::uint64_t slot = 0; slot < 16; ++slot) {
    const std::uint64_t extended = prefix | (slot << bits);
    std::vector<std::uint64_t> hits;
    for (auto t : tags) {
      if (low_bits_equal(t, extended, bits + 4)) hits.push_back(t);
    }
    if (hits.size() == 1) out.uids.push_back(hits.front());
    if (hits.size() > 1) walk(tags, extended, bits + 4, out);
  }
}

}  // namespace detail

inline Singulation singulate(std::vector<std::uint64_t> tags) {
  Singulation out;
  detail::walk(tags, 0, 0, out);
  std::sort(out.uids.begin(), out.uids.end());
  return out;
}

}  // namespace oracle
