#pragma once

#include <cstdint>

namespace copa {

// Coordinates addressing one substream. A draw sequence is a pure function
// of (seed, id, draw index), so identical coordinates reproduce identical
// draws regardless of execution order or thread count. Strategy identity is
// deliberately absent: runs compared under common random numbers share the
// same coordinates and therefore the same draws.
struct StreamId {
  uint32_t experiment = 0;
  uint32_t repetition = 0;
  uint32_t entity = 0;  // bidder index; K means the outside bid
  uint32_t round = 0;
};

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

class RngStream {
 public:
  RngStream(uint64_t seed, StreamId id) : seed_(seed) {
    uint64_t h = detail::mix64(seed ^ 0x8f1bbcdcbfa53e0bull);
    h = detail::mix64(h ^ id.experiment);
    h = detail::mix64(h ^ id.repetition);
    h = detail::mix64(h ^ id.entity);
    h = detail::mix64(h ^ id.round);
    base_ = h;
  }

  uint64_t seed() const { return seed_; }

  RngStream at(StreamId id) const { return RngStream(seed_, id); }

  uint64_t next_u64() {
    return detail::mix64(base_ + (++counter_) * 0x9e3779b97f4a7c15ull);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

 private:
  uint64_t seed_;
  uint64_t base_;
  uint64_t counter_ = 0;
};

}  // namespace copa
